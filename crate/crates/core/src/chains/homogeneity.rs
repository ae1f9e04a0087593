use serde::Serialize;

use super::ExplicitGraphModel;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Homogeneity {
    /// Geometric mean of the branching factors over all chains.
    pub n_bar: f64,
    /// Arithmetic mean of the step distances over all chains.
    pub d_bar: f64,
    /// Largest relative deviation of one chain's own means from `n_bar` or
    /// `d_bar`.
    pub dispersion: f64,
    pub chains: usize,
}

#[derive(Default)]
struct Tally {
    chains: usize,
    sum_ln_n: f64,
    sum_d: f64,
    ln_n_range: (f64, f64),
    d_range: (f64, f64),
}

impl Tally {
    fn add(&mut self, ln_n: f64, d: f64) {
        if self.chains == 0 {
            self.ln_n_range = (ln_n, ln_n);
            self.d_range = (d, d);
        }
        self.chains += 1;
        self.sum_ln_n += ln_n;
        self.sum_d += d;
        self.ln_n_range = (self.ln_n_range.0.min(ln_n), self.ln_n_range.1.max(ln_n));
        self.d_range = (self.d_range.0.min(d), self.d_range.1.max(d));
    }
}

/// Averages branching and step distance over every chain that starts at
/// `start` and follows the cyclic type `pattern` for `steps` transitions.
///
/// A chain with `steps` transitions has `steps + 1` operators. Its own
/// branching factor is the geometric mean of the number of choices at each
/// transition, and its own step distance the arithmetic mean. Chains that
/// hit an operator with no admissible successor are not counted.
pub fn estimate_homogeneity(
    model: &ExplicitGraphModel,
    start: usize,
    pattern: &[usize],
    steps: usize,
) -> Result<Homogeneity> {
    let m = model.labels().len();
    let bad = |msg: String| Err(Error::InvalidGraph(msg));
    let r = pattern.len();
    if r < 2 {
        return bad("a pattern needs at least two types".into());
    }
    if pattern.iter().any(|&t| t >= m) {
        return bad(format!("pattern {pattern:?} names a type outside 0..{m}"));
    }
    if (0..r).any(|i| pattern[i] == pattern[(i + 1) % r]) {
        return bad(format!(
            "pattern {pattern:?} repeats a type in consecutive positions"
        ));
    }
    if steps == 0 || !steps.is_multiple_of(r) {
        return bad(format!(
            "steps must be a positive multiple of {r}, got {steps}"
        ));
    }
    if start >= model.len() {
        return bad(format!("no operator {start}"));
    }
    if model.operators()[start].type_index != pattern[0] {
        return bad(format!(
            "operator {start} does not have type {}",
            pattern[0]
        ));
    }

    let mut tally = Tally::default();
    walk(model, pattern, steps, start, 0, 0.0, 0.0, &mut tally);
    if tally.chains == 0 {
        return Err(Error::NoChains(format!(
            "{steps} steps of {pattern:?} from operator {start}"
        )));
    }
    let k = tally.chains as f64;
    let s = steps as f64;
    let ln_bar = tally.sum_ln_n / k;
    let d_bar = tally.sum_d / k;
    let n_bar = (ln_bar / s).exp();
    let d_mean = d_bar / s;
    let n_dev = [tally.ln_n_range.0, tally.ln_n_range.1]
        .map(|x| ((x - ln_bar) / s).exp_m1().abs())
        .into_iter()
        .fold(0.0, f64::max);
    let d_dev = [tally.d_range.0, tally.d_range.1]
        .map(|x| (x - d_bar).abs() / d_bar.abs().max(f64::MIN_POSITIVE))
        .into_iter()
        .fold(0.0, f64::max);
    Ok(Homogeneity {
        n_bar,
        d_bar: d_mean,
        dispersion: n_dev.max(d_dev),
        chains: tally.chains,
    })
}

#[allow(clippy::too_many_arguments)]
fn walk(
    model: &ExplicitGraphModel,
    pattern: &[usize],
    steps: usize,
    op: usize,
    depth: usize,
    ln_n: f64,
    d: f64,
    tally: &mut Tally,
) {
    if depth == steps {
        tally.add(ln_n, d);
        return;
    }
    let here = pattern[depth % pattern.len()];
    let next = pattern[(depth + 1) % pattern.len()];
    let choices: Vec<usize> = model
        .neighbours(op)
        .iter()
        .copied()
        .filter(|&o| model.operators()[o].type_index == next)
        .collect();
    if choices.is_empty() {
        return;
    }
    let ln_b = (choices.len() as f64).ln();
    let step = model.step_distance(here, next);
    for o in choices {
        walk(
            model,
            pattern,
            steps,
            o,
            depth + 1,
            ln_n + ln_b,
            d + step,
            tally,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::super::{build_ising_chain, build_xy_lattice};
    use super::*;

    fn op_on(model: &ExplicitGraphModel, t: usize, cell: &str) -> usize {
        let c = model.cell_index(cell).unwrap();
        (0..model.len())
            .find(|&k| {
                model.operators()[k].type_index == t && model.operators()[k].support.contains(&c)
            })
            .unwrap()
    }

    #[test]
    fn ising_interior() {
        let m = build_ising_chain(40).unwrap();
        let h = estimate_homogeneity(&m, 20, &[0, 1], 12).unwrap();
        assert!((h.n_bar - 2.0).abs() < 1e-12);
        assert!((h.d_bar - 0.5).abs() < 1e-12);
        assert!(h.dispersion < 1e-9);
        assert_eq!(h.chains, 1 << 12);
    }

    #[test]
    fn ising_boundary_shows_dispersion() {
        let m = build_ising_chain(6).unwrap();
        let h = estimate_homogeneity(&m, 1, &[0, 1], 6).unwrap();
        assert!(h.dispersion > 0.01);
        assert!(h.n_bar < 2.0);
    }

    #[test]
    fn xy_interior_patterns() {
        let m = build_xy_lattice(6, 6).unwrap();
        let x = op_on(&m, 0, "h2_2");
        let h = estimate_homogeneity(&m, x, &[0, 2], 2).unwrap();
        assert!((h.n_bar - 8f64.sqrt()).abs() < 1e-12);
        assert!((h.d_bar - 0.5).abs() < 1e-12);
        assert!(h.dispersion < 1e-9);
        let h = estimate_homogeneity(&m, x, &[0, 1], 2).unwrap();
        assert!((h.n_bar - 7.0).abs() < 1e-12);
        assert!((h.d_bar - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pattern_checks() {
        let m = build_ising_chain(5).unwrap();
        assert!(estimate_homogeneity(&m, 2, &[0], 2).is_err());
        assert!(estimate_homogeneity(&m, 2, &[0, 0], 2).is_err());
        assert!(estimate_homogeneity(&m, 2, &[0, 1], 3).is_err());
        assert!(estimate_homogeneity(&m, 2, &[0, 2], 2).is_err());
        assert!(estimate_homogeneity(&m, 2, &[1, 0], 2).is_err());
    }

    #[test]
    fn dead_end_pattern_has_no_chains() {
        // without bonds a site operator has nowhere to go
        let m = build_ising_chain(3).unwrap();
        let keep: Vec<bool> = m.operators().iter().map(|o| o.type_index == 0).collect();
        let lone = m.restrict(&keep).unwrap();
        assert!(matches!(
            estimate_homogeneity(&lone, 0, &[0, 1], 2),
            Err(Error::NoChains(_))
        ));
    }
}
