use std::f64::consts::LN_2;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use super::{estimate_homogeneity, ExplicitGraphModel};
use crate::error::{Error, Result};

fn as_decimal<S: Serializer>(n: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_str_radix(10))
}

pub(crate) fn ln_big(n: &BigUint) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        n.to_f64().map_or(f64::NAN, f64::ln)
    } else {
        let shift = bits - 900;
        (n >> shift).to_f64().map_or(f64::NAN, f64::ln) + shift as f64 * LN_2
    }
}

/// Number of chains of `n` operators that start on an operator meeting
/// `from` and end on one meeting `to`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainCount {
    pub n: usize,
    #[serde(serialize_with = "as_decimal")]
    pub count: BigUint,
    pub from: Vec<usize>,
    pub to: Vec<usize>,
    pub distance: f64,
}

pub fn count_chains(
    model: &ExplicitGraphModel,
    from: &[usize],
    to: &[usize],
    n: usize,
) -> Result<ChainCount> {
    if n == 0 {
        return Err(Error::InvalidGraph(
            "chains have at least one operator".into(),
        ));
    }
    Ok(count_chain_series(model, from, to, n)?
        .pop()
        .expect("n >= 1"))
}

/// Counts for every length `1..=n_max`, sharing one pass of the transfer
/// iteration.
pub fn count_chain_series(
    model: &ExplicitGraphModel,
    from: &[usize],
    to: &[usize],
    n_max: usize,
) -> Result<Vec<ChainCount>> {
    model.check_region(from, "source")?;
    model.check_region(to, "target")?;
    let ends = model.touching(to);
    let distance = model.region_distance(from, to);
    let mut walkers: Vec<BigUint> = model
        .touching(from)
        .into_iter()
        .map(|t| BigUint::from(t as u8))
        .collect();
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        if n > 1 {
            let mut next = vec![BigUint::zero(); model.len()];
            for (k, w) in walkers.iter().enumerate() {
                if !w.is_zero() {
                    for &o in model.neighbours(k) {
                        next[o] += w;
                    }
                }
            }
            walkers = next;
        }
        let count = walkers
            .iter()
            .zip(&ends)
            .filter(|(_, &e)| e)
            .map(|(w, _)| w)
            .sum();
        out.push(ChainCount {
            n,
            count,
            from: from.to_vec(),
            to: to.to_vec(),
            distance,
        });
    }
    Ok(out)
}

/// Growth rate and mean step of a two-type lattice, read off the interior.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeConstants {
    /// `√(n₀₁ n₁₀)`
    pub gamma: f64,
    /// `2 / (D₀ + D₁)`
    pub xi: f64,
    /// `max(√(n₀₁/n₁₀), √(n₁₀/n₀₁))`
    pub asymmetry: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    pub n: usize,
    #[serde(serialize_with = "as_decimal")]
    pub count: BigUint,
    pub generic: f64,
    pub lattice: Option<f64>,
    pub homogeneous: Option<f64>,
    /// `min ln(bound / count)` over the bounds that apply; infinite when
    /// there are no chains.
    pub slack: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub lambda: f64,
    /// Largest operator degree.
    pub nu: usize,
    /// Operators meeting the source region.
    pub n_p: usize,
    pub distance: f64,
    pub lattice: Option<LatticeConstants>,
    /// `(n̄, D̄)` when the estimator finds the bulk homogeneous.
    pub homogeneous: Option<(f64, f64)>,
    pub rows: Vec<BoundRow>,
}

/// Bulk constants of a two-type model, or `None` when the model has another
/// number of types or no consistent interior.
fn lattice_constants(model: &ExplicitGraphModel) -> Option<(LatticeConstants, f64)> {
    if model.labels().len() != 2 {
        return None;
    }
    let table = model.interior_table().ok()?;
    if table.iter().any(|t| t.n_min != t.n_max || t.n_max == 0) {
        return None;
    }
    let (n01, n10) = (table[0].n_max as f64, table[1].n_max as f64);
    let d_sum = table[0].d + table[1].d;
    let c = LatticeConstants {
        gamma: (n01 * n10).sqrt(),
        xi: 2.0 / d_sum,
        asymmetry: (n01 / n10).sqrt().max((n10 / n01).sqrt()),
    };
    Some((c, d_sum))
}

/// `(n̄, D̄)` from two-step chains leaving the interior operator of type 0
/// nearest the middle of the operator list.
fn bulk_homogeneity(model: &ExplicitGraphModel) -> Option<(f64, f64)> {
    if model.labels().len() != 2 {
        return None;
    }
    let inner: Vec<usize> = (0..model.len())
        .filter(|&k| model.operators()[k].interior && model.operators()[k].type_index == 0)
        .collect();
    let start = *inner.get(inner.len() / 2)?;
    let h = estimate_homogeneity(model, start, &[0, 1], 2).ok()?;
    (h.dispersion <= 1e-9).then_some((h.n_bar, h.d_bar))
}

/// Compares exact chain counts with the chain-count bounds for
/// `n = 1..=n_max`.
///
/// Every bound carries the factor `N_P` because the count sums over all
/// starting operators that meet `from`. The lattice and homogeneous bounds
/// also carry `asymmetry · e^{λ D̄}`, which covers chains of odd length and
/// the one-step overhang at the far end. The lattice and homogeneous bounds
/// are only formed for two-type models with a consistent interior.
pub fn check_count_bounds(
    model: &ExplicitGraphModel,
    from: &[usize],
    to: &[usize],
    n_max: usize,
    lambda: f64,
) -> Result<BoundReport> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidLambda(lambda));
    }
    let counts = count_chain_series(model, from, to, n_max)?;
    let n_p = model.touching(from).iter().filter(|&&t| t).count();
    let nu = model.max_degree();
    let d = model.region_distance(from, to);
    let lattice = lattice_constants(model);
    let homogeneous = bulk_homogeneity(model);
    let ln_np = (n_p as f64).ln();
    let r = model.range();

    let mut rows = Vec::with_capacity(counts.len());
    for c in counts {
        let n = c.n as f64;
        let mut bounds = vec![(
            "generic",
            ln_np + n * (nu as f64).ln() + lambda * (n * r - d),
        )];
        let ln_lattice = lattice.as_ref().map(|(k, d_sum)| {
            let d_bar = 0.5 * d_sum;
            ln_np + k.asymmetry.ln() + lambda * d_bar + n * k.gamma.ln() + lambda * (n * d_bar - d)
        });
        let ln_homog = match (&lattice, homogeneous) {
            (Some((k, _)), Some((n_bar, d_bar))) => Some(
                ln_np
                    + k.asymmetry.ln()
                    + lambda * d_bar
                    + n * n_bar.ln()
                    + lambda * (n * d_bar - d),
            ),
            _ => None,
        };
        bounds.extend(ln_lattice.map(|b| ("lattice", b)));
        bounds.extend(ln_homog.map(|b| ("homogeneous", b)));

        let ln_count = if c.count.is_zero() {
            f64::NEG_INFINITY
        } else {
            ln_big(&c.count)
        };
        let mut slack = f64::INFINITY;
        for &(name, ln_bound) in &bounds {
            let s = ln_bound - ln_count;
            if s < -1e-12 * ln_bound.abs().max(1.0) {
                return Err(Error::BoundViolated {
                    n: c.n,
                    bound: name,
                    count: c.count.to_string(),
                    value: ln_bound.exp(),
                });
            }
            slack = slack.min(s);
        }
        rows.push(BoundRow {
            n: c.n,
            count: c.count,
            generic: bounds[0].1.exp(),
            lattice: ln_lattice.map(f64::exp),
            homogeneous: ln_homog.map(f64::exp),
            slack,
        });
    }

    Ok(BoundReport {
        lambda,
        nu,
        n_p,
        distance: d,
        lattice: lattice.map(|(k, _)| k),
        homogeneous,
        rows,
    })
}
