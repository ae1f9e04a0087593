//! Lieb-Robinson speed from the envelope of cycle curves.
//!
//! Each elementary cycle contributes a curve `k e^{ξλ} / λ`. The speed is
//! `C · inf_λ A_max(λ)` where `A_max` is the pointwise maximum of the curves.
//! Every curve is strictly convex with a single minimum at `λ = 1/ξ`, so
//! `A_max` is strictly convex too and its minimizer is either the minimum of
//! the curve that is on top there, or a crossing of two curves. The solver
//! evaluates `A_max` at all of those candidates and keeps the smallest,
//! which is correct for every ordering of the curves.
//!
//! All comparisons are done on `ln k + ξλ − ln λ`.

use serde::Serialize;

use crate::cycles::{enumerate_cycles, Cycle};
use crate::error::{Error, Result};
use crate::model::{transition_factor, Model, SpeedConstant};

/// Relative tolerance for deciding that two curves tie at the minimizer.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Curves whose `k` and `ξ` agree to this relative precision are one curve.
const SAME_TERM: f64 = 1e-12;

/// One curve `k e^{ξλ} / λ` of the envelope.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopeTerm {
    pub cycle: Cycle,
}

impl EnvelopeTerm {
    pub fn new(cycle: Cycle) -> Self {
        EnvelopeTerm { cycle }
    }

    pub fn k(&self) -> f64 {
        self.cycle.k()
    }

    pub fn ln_k(&self) -> f64 {
        self.cycle.ln_k()
    }

    pub fn xi(&self) -> f64 {
        self.cycle.xi()
    }

    /// `ln(k e^{ξλ})`
    pub fn ln_growth(&self, lambda: f64) -> f64 {
        self.ln_k() + self.xi() * lambda
    }

    /// `ln(k e^{ξλ} / λ)`
    pub fn ln_value(&self, lambda: f64) -> f64 {
        self.ln_growth(lambda) - lambda.ln()
    }

    pub fn value(&self, lambda: f64) -> f64 {
        self.ln_value(lambda).exp()
    }

    /// Where this curve alone attains its minimum.
    pub fn minimizer(&self) -> f64 {
        1.0 / self.xi()
    }

    fn same_as(&self, other: &EnvelopeTerm) -> bool {
        (self.ln_k() - other.ln_k()).abs() <= SAME_TERM
            && (self.xi() - other.xi()).abs() <= SAME_TERM * self.xi().max(other.xi())
    }
}

/// The envelope curves of a model, one per elementary cycle.
pub fn envelope_terms(model: &Model) -> Result<Vec<EnvelopeTerm>> {
    let cycles = enumerate_cycles(model)?;
    if let Some(flat) = cycles.iter().find(|c| c.xi() == 0.0) {
        return Err(Error::ZeroXi(flat.name(model)));
    }
    Ok(cycles.into_iter().map(EnvelopeTerm::new).collect())
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidLambda(lambda))
    }
}

/// `L(λ) = max k e^{ξλ}` over the terms.
pub fn max_growth(terms: &[EnvelopeTerm], lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    ln_max_growth(terms, lambda).map(f64::exp)
}

fn ln_max_growth(terms: &[EnvelopeTerm], lambda: f64) -> Result<f64> {
    terms
        .iter()
        .map(|t| t.ln_growth(lambda))
        .reduce(f64::max)
        .ok_or(Error::NoCycles)
}

/// `A_max(λ) = L(λ) / λ`.
pub fn envelope(terms: &[EnvelopeTerm], lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok((ln_max_growth(terms, lambda)? - lambda.ln()).exp())
}

/// The positive `λ` where two curves cross, if any.
pub fn intersection(a: &EnvelopeTerm, b: &EnvelopeTerm) -> Option<f64> {
    let dxi = b.xi() - a.xi();
    if dxi == 0.0 {
        return None;
    }
    let lambda = (a.ln_k() - b.ln_k()) / dxi;
    (lambda > 0.0 && lambda.is_finite()).then_some(lambda)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpeedForm {
    /// The minimum of `A_max` is the minimum of one curve: `C e k ξ`.
    SingleTerm,
    /// The minimum of `A_max` is where two curves cross.
    Breakpoint,
}

impl SpeedForm {
    pub fn as_str(self) -> &'static str {
        match self {
            SpeedForm::SingleTerm => "single-term",
            SpeedForm::Breakpoint => "breakpoint",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpeedResult {
    pub v_lr: f64,
    pub lambda_star: f64,
    pub form: SpeedForm,
    /// One cycle for a single-term minimum; for a breakpoint the curve on top
    /// left of the minimizer, then the one on top right of it.
    pub active: Vec<Cycle>,
    pub speed_constant: f64,
}

pub fn solve_speed(model: &Model) -> Result<SpeedResult> {
    let terms = envelope_terms(model)?;
    solve_terms(&terms, model.speed_constant())
}

/// Drops repeated curves (keeping the first) and curves that lie below
/// another curve for every `λ`.
pub fn prune_terms(terms: &[EnvelopeTerm]) -> Vec<&EnvelopeTerm> {
    let mut distinct: Vec<&EnvelopeTerm> = Vec::new();
    for t in terms {
        if !distinct.iter().any(|d| d.same_as(t)) {
            distinct.push(t);
        }
    }
    distinct
        .iter()
        .filter(|t| {
            !distinct.iter().any(|o| {
                !std::ptr::eq(*o, **t)
                    && o.ln_k() >= t.ln_k() - SAME_TERM
                    && o.xi() >= t.xi() * (1.0 - SAME_TERM)
            })
        })
        .copied()
        .collect()
}

pub fn solve_terms(terms: &[EnvelopeTerm], constant: SpeedConstant) -> Result<SpeedResult> {
    if terms.is_empty() {
        return Err(Error::NoCycles);
    }
    if let Some(flat) = terms.iter().find(|t| t.xi() <= 0.0) {
        return Err(Error::ZeroXi(format!("{:?}", flat.cycle.sequence())));
    }
    let live = prune_terms(terms);

    let ln_envelope = |lambda: f64| {
        live.iter()
            .map(|t| t.ln_value(lambda))
            .fold(f64::NEG_INFINITY, f64::max)
    };

    let mut candidates: Vec<f64> = live.iter().map(|t| t.minimizer()).collect();
    for (i, a) in live.iter().enumerate() {
        for b in &live[i + 1..] {
            candidates.extend(intersection(a, b));
        }
    }
    let (lambda_star, ln_min) = candidates.iter().map(|&l| (l, ln_envelope(l))).fold(
        (f64::NAN, f64::INFINITY),
        |best, cur| if cur.1 < best.1 { cur } else { best },
    );

    let tied: Vec<&EnvelopeTerm> = live
        .iter()
        .copied()
        .filter(|t| t.ln_value(lambda_star) >= ln_min - TIE_TOLERANCE)
        .collect();
    let at_own_minimum = tied
        .iter()
        .find(|t| (lambda_star * t.xi() - 1.0).abs() <= TIE_TOLERANCE);

    let (form, active) = match (tied.len(), at_own_minimum) {
        (1, _) | (_, Some(_)) => {
            let term = at_own_minimum.unwrap_or(&tied[0]);
            (SpeedForm::SingleTerm, vec![term.cycle.clone()])
        }
        _ => {
            // Left of the crossing the flattest tied curve is on top, right
            // of it the steepest.
            let left = tied
                .iter()
                .min_by(|a, b| a.xi().total_cmp(&b.xi()))
                .expect("nonempty");
            let right = tied
                .iter()
                .max_by(|a, b| a.xi().total_cmp(&b.xi()))
                .expect("nonempty");
            (
                SpeedForm::Breakpoint,
                vec![left.cycle.clone(), right.cycle.clone()],
            )
        }
    };

    Ok(SpeedResult {
        v_lr: constant.value() * ln_min.exp(),
        lambda_star,
        form,
        active,
        speed_constant: constant.value(),
    })
}

/// Evaluates the speed formula for a given form directly:
/// `C e k ξ` for a single term, or for a breakpoint between `(k₁, ξ₁)` and
/// `(k₂, ξ₂)`
///
/// ```text
/// C (ξ₁ − ξ₂) k₁^{ξ₂/(ξ₂−ξ₁)} k₂^{ξ₁/(ξ₁−ξ₂)} / (ln k₂ − ln k₁)
/// ```
pub fn closed_form_speed(
    form: SpeedForm,
    active: &[Cycle],
    constant: SpeedConstant,
) -> Result<f64> {
    let c = constant.value();
    match (form, active) {
        (SpeedForm::SingleTerm, [cycle]) => Ok(c * std::f64::consts::E * cycle.k() * cycle.xi()),
        (SpeedForm::Breakpoint, [first, second]) => {
            let (l1, x1) = (first.ln_k(), first.xi());
            let (l2, x2) = (second.ln_k(), second.xi());
            if x1 == x2 || l1 == l2 {
                return Err(Error::FormMismatch(
                    "breakpoint cycles must differ in both k and ξ".into(),
                ));
            }
            let crossing = (x1 - x2) / (l2 - l1);
            if crossing <= 0.0 {
                return Err(Error::FormMismatch(
                    "breakpoint cycles do not cross at positive λ".into(),
                ));
            }
            let ln_power = (x2 * l1 - x1 * l2) / (x2 - x1);
            Ok(c * crossing * ln_power.exp())
        }
        (form, cycles) => Err(Error::FormMismatch(format!(
            "{} takes {} cycle(s), got {}",
            form.as_str(),
            if form == SpeedForm::SingleTerm { 1 } else { 2 },
            cycles.len()
        ))),
    }
}

/// `ln M̃(λ)`; see [`prefactor`].
pub fn ln_prefactor(model: &Model, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (a, b) in model.arcs() {
        let f = transition_factor(model, a, b, lambda)?.ln();
        lo = lo.min(f);
        hi = hi.max(f);
    }
    let h_lo = model
        .couplings()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let h_hi = model.couplings().iter().copied().fold(0.0, f64::max);
    let m = model.len() as f64;
    Ok(0.5 * (h_hi / h_lo).ln() + m * (m - 1.0) * (hi - lo))
}

/// Prefactor `M̃(λ) = M · G(λ)^{m(m−1)}` of the bound.
///
/// `G(λ)` is the largest ratio between two nonzero transition factors. The
/// seed `M = max √(h_a / h_b)` is the two-interaction value applied to every
/// pair of couplings; it is an upper-bound constant, not a tight one. The
/// result is at least 1 and may overflow to infinity for large `m`.
pub fn prefactor(model: &Model, lambda: f64) -> Result<f64> {
    ln_prefactor(model, lambda).map(f64::exp)
}

/// The bound `M̃(λ) exp(λ (v(λ)|t| − d))` at a fixed `λ`, with
/// `v(λ) = C L(λ) / λ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundEnvelope {
    pub lambda: f64,
    pub prefactor: f64,
    pub velocity_at_lambda: f64,
    ln_prefactor: f64,
}

impl BoundEnvelope {
    pub fn new(model: &Model, lambda: f64) -> Result<Self> {
        let terms = envelope_terms(model)?;
        Self::with_terms(model, &terms, lambda)
    }

    pub fn with_terms(model: &Model, terms: &[EnvelopeTerm], lambda: f64) -> Result<Self> {
        let ln_prefactor = ln_prefactor(model, lambda)?;
        let growth = max_growth(terms, lambda)?;
        Ok(BoundEnvelope {
            lambda,
            prefactor: ln_prefactor.exp(),
            velocity_at_lambda: model.speed_constant().value() * growth / lambda,
            ln_prefactor,
        })
    }

    pub fn ln_value(&self, t: f64, d: f64) -> f64 {
        self.ln_prefactor + self.lambda * (self.velocity_at_lambda * t.abs() - d)
    }

    pub fn value(&self, t: f64, d: f64) -> f64 {
        self.ln_value(t, d).exp()
    }
}

pub fn bound_envelope(model: &Model, lambda: f64, t: f64, d: f64) -> Result<f64> {
    if d.is_nan() || d < 0.0 {
        return Err(Error::NegativeValue {
            field: "distance".into(),
            value: d,
        });
    }
    Ok(BoundEnvelope::new(model, lambda)?.value(t, d))
}
