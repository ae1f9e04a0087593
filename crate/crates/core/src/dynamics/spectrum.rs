use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::DenseOperator;
use crate::chains::ExplicitGraphModel;
use crate::error::{Error, Result};

/// Dense methods stop here: 12 spins is a 4096 × 4096 matrix.
pub const MAX_SITES: usize = 12;

fn check_hermitian(h: &DenseOperator) -> Result<()> {
    let defect = h.hermiticity_defect();
    if defect > 1e-12 * h.max_abs().max(1.0) {
        return Err(Error::NonHermitian(defect));
    }
    Ok(())
}

/// `H = Σ_ops h_type · term(op)`, with `couplings[t]` the coupling of type
/// `t`.
pub fn build_hamiltonian(model: &ExplicitGraphModel, couplings: &[f64]) -> Result<DenseOperator> {
    let sites = model.sites();
    if sites > MAX_SITES {
        return Err(Error::TooLarge {
            sites,
            max: MAX_SITES,
        });
    }
    if couplings.len() != model.labels().len() {
        return Err(Error::DimensionMismatch(
            couplings.len(),
            model.labels().len(),
        ));
    }
    let mut h = DenseOperator::zeros(1 << sites);
    for op in model.operators() {
        let coefficient = couplings[op.type_index] * op.term.coefficient;
        h.add_pauli_string(Complex64::new(coefficient, 0.0), &op.term.factors)?;
    }
    check_hermitian(&h)?;
    Ok(h)
}

/// Eigendecomposition `H = U Λ U†` of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct Spectrum {
    values: DVector<f64>,
    vectors: DenseOperator,
    /// `U†`, kept to avoid a transpose per evolution.
    adjoint: DenseOperator,
}

impl Spectrum {
    pub fn new(h: &DenseOperator) -> Result<Self> {
        check_hermitian(h)?;
        let (values, vectors) = if h.is_real() {
            let eig = h.re().clone().symmetric_eigen();
            (eig.eigenvalues, DenseOperator::from_real(eig.eigenvectors)?)
        } else {
            let eig = h.to_complex().symmetric_eigen();
            (
                eig.eigenvalues,
                DenseOperator::from_complex(&eig.eigenvectors)?,
            )
        };
        let adjoint = vectors.adjoint();
        let defect = adjoint
            .mul(&vectors)?
            .max_abs_diff(&DenseOperator::identity(h.dim()));
        if defect > 1e-9 {
            return Err(Error::Numerical(format!(
                "eigenvectors are not unitary (defect {defect:.3e})"
            )));
        }
        Ok(Spectrum {
            values,
            vectors,
            adjoint,
        })
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn vectors(&self) -> &DenseOperator {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Prepares `O` for repeated evolution.
    pub fn evolver(&self, o: &DenseOperator) -> Result<Evolver<'_>> {
        if o.dim() != self.dim() {
            return Err(Error::DimensionMismatch(o.dim(), self.dim()));
        }
        let rotated = self.adjoint.mul(o)?.mul(&self.vectors)?;
        Ok(Evolver {
            spectrum: self,
            original: o.clone(),
            rotated,
        })
    }

    /// `e^{iHt} O e^{−iHt}`
    pub fn evolve(&self, o: &DenseOperator, t: f64) -> Result<DenseOperator> {
        self.evolver(o)?.at(t)
    }
}

/// `O` in the eigenbasis of `H`; each time only needs a phase and two
/// basis changes.
pub struct Evolver<'a> {
    spectrum: &'a Spectrum,
    original: DenseOperator,
    rotated: DenseOperator,
}

impl Evolver<'_> {
    pub fn at(&self, t: f64) -> Result<DenseOperator> {
        if t == 0.0 {
            return Ok(self.original.clone());
        }
        let n = self.spectrum.dim();
        let phase: Vec<Complex64> = self
            .spectrum
            .values
            .iter()
            .map(|&e| Complex64::from_polar(1.0, e * t))
            .collect();
        let (ore, oim) = (self.rotated.re(), self.rotated.im());
        let mut re = DMatrix::zeros(n, n);
        let mut im = DMatrix::zeros(n, n);
        for k in 0..n {
            for j in 0..n {
                let z = Complex64::new(ore[(j, k)], oim[(j, k)]) * phase[j] * phase[k].conj();
                re[(j, k)] = z.re;
                im[(j, k)] = z.im;
            }
        }
        let inner = DenseOperator::new(re, im)?;
        self.spectrum
            .vectors
            .mul(&inner)?
            .mul(&self.spectrum.adjoint)
    }
}

/// One-off evolution; decompose once with [`Spectrum`] for many times.
pub fn evolve(o: &DenseOperator, h: &DenseOperator, t: f64) -> Result<DenseOperator> {
    if o.dim() != h.dim() {
        return Err(Error::DimensionMismatch(o.dim(), h.dim()));
    }
    Spectrum::new(h)?.evolve(o, t)
}
