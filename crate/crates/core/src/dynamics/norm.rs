use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{DenseOperator, Pauli};
use crate::error::{Error, Result};

type CVec = DVector<Complex64>;

const MAX_KRYLOV: usize = 120;

/// Deterministic start vector with no special alignment.
fn start_vector(n: usize) -> CVec {
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut next = || {
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        (z ^ (z >> 31)) as f64 / u64::MAX as f64 - 0.5
    };
    let v = CVec::from_fn(n, |_, _| Complex64::new(next(), next()));
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

/// Largest eigenvalue of a Hermitian positive semidefinite map, by Lanczos
/// with full reorthogonalization. Exact once the Krylov space is the whole
/// space.
fn top_eigenvalue(n: usize, apply: impl Fn(&CVec) -> CVec) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let mut basis: Vec<CVec> = vec![start_vector(n)];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut theta = 0.0;
    loop {
        let j = basis.len() - 1;
        let mut w = apply(&basis[j]);
        alpha.push(basis[j].dotc(&w).re);
        for _ in 0..2 {
            for q in &basis {
                let c = q.dotc(&w);
                w.axpy(-c, q, Complex64::new(1.0, 0.0));
            }
        }
        let b = w.norm();

        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |r, c| {
            if r == c {
                alpha[r]
            } else if r + 1 == c || c + 1 == r {
                beta[r.min(c)]
            } else {
                0.0
            }
        });
        let eig = t.symmetric_eigen();
        let (top, &value) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        theta = value.max(theta);
        let residual = (b * eig.eigenvectors[(k - 1, top)]).abs();

        if k == n
            || k >= MAX_KRYLOV
            || b <= 1e-14 * theta.max(f64::MIN_POSITIVE)
            || residual <= 1e-13 * theta
        {
            return theta.max(0.0);
        }
        beta.push(b);
        basis.push(w / Complex64::new(b, 0.0));
    }
}

fn matvec(re: &DMatrix<f64>, im: &DMatrix<f64>, v: &CVec) -> CVec {
    let vr = v.map(|z| z.re);
    let vi = v.map(|z| z.im);
    let out_re = re * &vr - im * &vi;
    let out_im = re * &vi + im * &vr;
    out_re.zip_map(&out_im, Complex64::new)
}

/// `M† v` without forming the transpose.
fn matvec_adjoint(re: &DMatrix<f64>, im: &DMatrix<f64>, v: &CVec) -> CVec {
    let vr = v.map(|z| z.re);
    let vi = v.map(|z| z.im);
    let out_re = re.tr_mul(&vr) + im.tr_mul(&vi);
    let out_im = re.tr_mul(&vi) - im.tr_mul(&vr);
    out_re.zip_map(&out_im, Complex64::new)
}

fn largest_singular_value(re: &DMatrix<f64>, im: &DMatrix<f64>) -> f64 {
    top_eigenvalue(re.ncols(), |v| matvec_adjoint(re, im, &matvec(re, im, v))).sqrt()
}

/// Largest singular value.
pub fn spectral_norm(a: &DenseOperator) -> f64 {
    largest_singular_value(a.re(), a.im())
}

/// `‖AB − BA‖`
pub fn commutator_norm(a: &DenseOperator, b: &DenseOperator) -> Result<f64> {
    Ok(spectral_norm(&a.commutator(b)?))
}

/// `R A R†` for the single-site unitary `R` that maps `p` to `Z`.
fn rotate_to_z(a: &DenseOperator, site: usize, p: Pauli) -> DenseOperator {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let r = match p {
        Pauli::X => [[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]],
        Pauli::Y => [[c(s, 0.0), c(0.0, -s)], [c(s, 0.0), c(0.0, s)]],
        Pauli::Z | Pauli::I => return a.clone(),
    };
    let n = a.dim();
    let bit = 1 << site;
    let mut m = a.to_complex();
    // rows: M ← R M
    for lo in (0..n).filter(|i| i & bit == 0) {
        let hi = lo | bit;
        for col in 0..n {
            let (x, y) = (m[(lo, col)], m[(hi, col)]);
            m[(lo, col)] = r[0][0] * x + r[0][1] * y;
            m[(hi, col)] = r[1][0] * x + r[1][1] * y;
        }
    }
    // columns: M ← M R†
    for lo in (0..n).filter(|i| i & bit == 0) {
        let hi = lo | bit;
        for row in 0..n {
            let (x, y) = (m[(row, lo)], m[(row, hi)]);
            m[(row, lo)] = x * r[0][0].conj() + y * r[0][1].conj();
            m[(row, hi)] = x * r[1][0].conj() + y * r[1][1].conj();
        }
    }
    DenseOperator::from_complex(&m).expect("same shape")
}

/// Block of `A` with rows where bit `site` is `row_bit` and columns where it
/// is the opposite.
fn off_block(a: &DenseOperator, site: usize, row_bit: bool) -> (DMatrix<f64>, DMatrix<f64>) {
    let bit = 1 << site;
    let rows: Vec<usize> = (0..a.dim()).filter(|i| (i & bit != 0) == row_bit).collect();
    let take = |m: &DMatrix<f64>| {
        DMatrix::from_fn(rows.len(), rows.len(), |r, c| m[(rows[r], rows[c] ^ bit)])
    };
    (take(a.re()), take(a.im()))
}

/// `‖[A, σ_site]‖` for a single-site Pauli `σ`.
///
/// After rotating `σ` to `σᶻ`, the commutator only keeps the blocks of `A`
/// that flip the spin, each doubled, so the norm is twice the larger of
/// their singular values. For Hermitian `A` the two blocks are adjoints and
/// one suffices.
pub fn pauli_commutator_norm(a: &DenseOperator, site: usize, p: Pauli) -> Result<f64> {
    if site >= a.sites() {
        return Err(Error::DimensionMismatch(site, a.sites()));
    }
    if p == Pauli::I {
        return Ok(0.0);
    }
    let rotated = rotate_to_z(a, site, p);
    let (re, im) = off_block(&rotated, site, false);
    let mut sigma = largest_singular_value(&re, &im);
    if rotated.hermiticity_defect() > 1e-12 * rotated.max_abs().max(1.0) {
        let (re, im) = off_block(&rotated, site, true);
        sigma = sigma.max(largest_singular_value(&re, &im));
    }
    Ok(2.0 * sigma)
}

/// Upper bound `2‖B‖_F` on [`pauli_commutator_norm`] for Hermitian `A`;
/// cheap enough to rule out arrivals before running Lanczos.
pub(crate) fn pauli_commutator_frobenius(a: &DenseOperator, site: usize, p: Pauli) -> f64 {
    let rotated = rotate_to_z(a, site, p);
    let (re, im) = off_block(&rotated, site, false);
    2.0 * (re.norm_squared() + im.norm_squared()).sqrt()
}
