use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// `σ|b⟩ = phase · |b ⊕ flip⟩` for a single spin in state `b`.
    fn action(self, bit: bool) -> (bool, Complex64) {
        let one = Complex64::new(1.0, 0.0);
        match (self, bit) {
            (Pauli::I, _) => (false, one),
            (Pauli::X, _) => (true, one),
            (Pauli::Y, false) => (true, Complex64::new(0.0, 1.0)),
            (Pauli::Y, true) => (true, Complex64::new(0.0, -1.0)),
            (Pauli::Z, false) => (false, one),
            (Pauli::Z, true) => (false, -one),
        }
    }
}

/// Dense operator on `2^n` dimensional spin space, stored as separate real
/// and imaginary parts so products run on real matrix kernels. Bit `i` of a
/// basis index is spin site `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
}

impl DenseOperator {
    pub fn new(re: DMatrix<f64>, im: DMatrix<f64>) -> Result<Self> {
        let n = re.nrows();
        if re.ncols() != n || im.shape() != (n, n) {
            return Err(Error::DimensionMismatch(re.ncols(), n));
        }
        if !n.is_power_of_two() {
            return Err(Error::InvalidGraph(format!(
                "dimension {n} is not a power of two"
            )));
        }
        Ok(DenseOperator { re, im })
    }

    pub fn from_real(re: DMatrix<f64>) -> Result<Self> {
        let n = re.nrows();
        Self::new(re, DMatrix::zeros(n, n))
    }

    pub fn from_complex(m: &DMatrix<Complex64>) -> Result<Self> {
        Self::new(m.map(|z| z.re), m.map(|z| z.im))
    }

    pub fn zeros(dim: usize) -> Self {
        DenseOperator {
            re: DMatrix::zeros(dim, dim),
            im: DMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        DenseOperator {
            re: DMatrix::identity(dim, dim),
            im: DMatrix::zeros(dim, dim),
        }
    }

    /// Tensor product of single-site Paulis on `sites` spins.
    pub fn pauli_string(sites: usize, factors: &[(usize, Pauli)]) -> Result<Self> {
        let mut op = Self::zeros(1 << sites);
        op.add_pauli_string(Complex64::new(1.0, 0.0), factors)?;
        Ok(op)
    }

    pub fn pauli(sites: usize, site: usize, p: Pauli) -> Result<Self> {
        Self::pauli_string(sites, &[(site, p)])
    }

    /// Adds `coefficient · ⊗ factors` in place, one entry per column.
    pub fn add_pauli_string(
        &mut self,
        coefficient: Complex64,
        factors: &[(usize, Pauli)],
    ) -> Result<()> {
        let dim = self.dim();
        let sites = self.sites();
        if let Some(&(s, _)) = factors.iter().find(|(s, _)| *s >= sites) {
            return Err(Error::DimensionMismatch(s, sites));
        }
        for col in 0..dim {
            let mut row = col;
            let mut phase = coefficient;
            for &(site, p) in factors {
                let (flip, f) = p.action(col >> site & 1 == 1);
                if flip {
                    row ^= 1 << site;
                }
                phase *= f;
            }
            self.re[(row, col)] += phase.re;
            self.im[(row, col)] += phase.im;
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.re.nrows()
    }

    pub fn sites(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn re(&self) -> &DMatrix<f64> {
        &self.re
    }

    pub fn im(&self) -> &DMatrix<f64> {
        &self.im
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        Complex64::new(self.re[(row, col)], self.im[(row, col)])
    }

    pub fn is_real(&self) -> bool {
        self.im.iter().all(|&x| x == 0.0)
    }

    pub fn to_complex(&self) -> DMatrix<Complex64> {
        self.re.zip_map(&self.im, Complex64::new)
    }

    pub fn scale(&self, s: f64) -> Self {
        DenseOperator {
            re: &self.re * s,
            im: &self.im * s,
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim() == other.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(self.dim(), other.dim()))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(DenseOperator {
            re: &self.re + &other.re,
            im: &self.im + &other.im,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let (a_real, b_real) = (self.is_real(), other.is_real());
        let mut re = &self.re * &other.re;
        let mut im = DMatrix::zeros(self.dim(), self.dim());
        if !a_real && !b_real {
            re -= &self.im * &other.im;
        }
        if !b_real {
            im += &self.re * &other.im;
        }
        if !a_real {
            im += &self.im * &other.re;
        }
        Ok(DenseOperator { re, im })
    }

    /// `AB − BA`
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    pub fn adjoint(&self) -> Self {
        DenseOperator {
            re: self.re.transpose(),
            im: -self.im.transpose(),
        }
    }

    /// Largest entry of `|A − A†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for c in 0..n {
            for r in c..n {
                let dr = self.re[(r, c)] - self.re[(c, r)];
                let di = self.im[(r, c)] + self.im[(c, r)];
                worst = worst.max(dr.hypot(di));
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.re
            .iter()
            .zip(self.im.iter())
            .map(|(a, b)| a.hypot(*b))
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).map_or(f64::INFINITY, |d| d.max_abs())
    }
}
