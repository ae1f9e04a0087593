//! Elementary cycles of interaction types.
//!
//! An elementary cycle is a closed walk `a_1 → a_2 → … → a_r → a_1` on the
//! interaction types in which no directed transition is used twice (the
//! closing transition `a_r → a_1` included). Its weight `k` and step length
//! `ξ` depend only on the set of transitions it uses, so cycles are
//! deduplicated by that set: `1 2 3 1 3 2` and `1 2 1 3 2 3` are one cycle.
//!
//! Every such transition set is a balanced, connected subgraph of the type
//! graph, and every balanced connected subgraph has an Eulerian circuit. The
//! enumeration walks transition subsets directly and emits the
//! lexicographically smallest circuit of each as its representative.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Model;

/// Transition sets larger than this make subset enumeration impractical
/// (five fully connected types use 20).
pub const MAX_ARCS: usize = 24;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cycle {
    sequence: Vec<usize>,
    arcs: Vec<(usize, usize)>,
    ln_k: f64,
    xi: f64,
}

impl Cycle {
    /// Type indices `a_1 … a_r`; the closing step back to `a_1` is implied.
    pub fn sequence(&self) -> &[usize] {
        &self.sequence
    }

    /// Sorted transitions, closing step included.
    pub fn arcs(&self) -> &[(usize, usize)] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    /// Geometric mean of `h · n` (times `K` when commutator-bounded).
    pub fn k(&self) -> f64 {
        self.ln_k.exp()
    }

    pub fn ln_k(&self) -> f64 {
        self.ln_k
    }

    /// Arithmetic mean of the step distances.
    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Labels joined by `-`, e.g. `X-Y-Z`.
    pub fn name(&self, model: &Model) -> String {
        self.sequence
            .iter()
            .map(|&i| model.label(i))
            .collect::<Vec<_>>()
            .join("-")
    }
}

/// Transitions of a closed type sequence, closing step included, sorted.
pub fn cycle_arcs(sequence: &[usize]) -> Vec<(usize, usize)> {
    let r = sequence.len();
    let mut arcs: Vec<_> = (0..r)
        .map(|i| (sequence[i], sequence[(i + 1) % r]))
        .collect();
    arcs.sort_unstable();
    arcs
}

fn check_sequence(model: &Model, sequence: &[usize]) -> Result<()> {
    let invalid = |why: &str| Err(Error::InvalidCycle(format!("{sequence:?}: {why}")));
    if sequence.len() < 2 {
        return invalid("needs at least two steps");
    }
    if sequence.iter().any(|&a| a >= model.len()) {
        return invalid("type index out of range");
    }
    let arcs = cycle_arcs(sequence);
    if arcs.iter().any(|&(a, b)| a == b) {
        return invalid("consecutive types must differ");
    }
    if arcs.windows(2).any(|w| w[0] == w[1]) {
        return invalid("a transition repeats");
    }
    Ok(())
}

fn raw_stats(model: &Model, sequence: &[usize]) -> (f64, f64) {
    let r = sequence.len();
    let (mut ln_k, mut xi) = (0.0, 0.0);
    for i in 0..r {
        let (a, b) = (sequence[i], sequence[(i + 1) % r]);
        ln_k += model.ln_step_weight(a, b);
        xi += model.distance(a, b);
    }
    (ln_k / r as f64, xi / r as f64)
}

/// `(k, ξ)` of a cycle given as a type sequence.
///
/// `k` is accumulated as a mean of logarithms so long cycles with large
/// couplings do not overflow.
pub fn cycle_stats(model: &Model, sequence: &[usize]) -> Result<(f64, f64)> {
    check_sequence(model, sequence)?;
    let name = || {
        sequence
            .iter()
            .map(|&i| model.label(i))
            .collect::<Vec<_>>()
            .join("-")
    };
    let r = sequence.len();
    let zero_step = (0..r).any(|i| {
        let (a, b) = (sequence[i], sequence[(i + 1) % r]);
        model.count(a, b) == 0.0 || model.coupling(a) == 0.0
    });
    if zero_step {
        return Err(Error::ZeroK(name()));
    }
    let (ln_k, xi) = raw_stats(model, sequence);
    if xi == 0.0 {
        return Err(Error::ZeroXi(name()));
    }
    Ok((ln_k.exp(), xi))
}

impl Cycle {
    pub(crate) fn from_sequence(model: &Model, sequence: Vec<usize>) -> Self {
        let (ln_k, xi) = raw_stats(model, &sequence);
        Cycle {
            arcs: cycle_arcs(&sequence),
            sequence,
            ln_k,
            xi,
        }
    }
}

/// All elementary cycles of the model's type graph, one per transition set,
/// sorted by `(length, sequence)`.
///
/// Cycles with `ξ = 0` are returned as-is; the speed solver rejects them.
pub fn enumerate_cycles(model: &Model) -> Result<Vec<Cycle>> {
    let m = model.len();
    let mut arcs: Vec<(usize, usize)> = model.arcs().collect();
    if arcs.len() > MAX_ARCS {
        return Err(Error::TooManyArcs {
            arcs: arcs.len(),
            limit: MAX_ARCS,
        });
    }
    // A vertex's balance is final once every arc whose smaller endpoint is
    // at most that vertex has been decided.
    arcs.sort_by_key(|&(a, b)| (a.min(b), a, b));
    let mut settled_at: Vec<Vec<usize>> = vec![Vec::new(); arcs.len() + 1];
    for v in 0..m {
        let end = arcs
            .iter()
            .position(|&(a, b)| a.min(b) > v)
            .unwrap_or(arcs.len());
        settled_at[end].push(v);
    }

    let mut search = SubsetSearch {
        m,
        arcs: &arcs,
        settled_at: &settled_at,
        balance: vec![0; m],
        chosen: Vec::new(),
        found: Vec::new(),
    };
    search.descend(0);

    let mut cycles: Vec<Cycle> = search
        .found
        .into_iter()
        .map(|seq| Cycle::from_sequence(model, seq))
        .collect();
    cycles.sort_by(|a, b| (a.len(), &a.sequence).cmp(&(b.len(), &b.sequence)));
    if cycles.is_empty() {
        return Err(Error::NoCycles);
    }
    Ok(cycles)
}

struct SubsetSearch<'a> {
    m: usize,
    arcs: &'a [(usize, usize)],
    settled_at: &'a [Vec<usize>],
    balance: Vec<i32>,
    chosen: Vec<(usize, usize)>,
    found: Vec<Vec<usize>>,
}

impl SubsetSearch<'_> {
    fn descend(&mut self, i: usize) {
        if self.settled_at[i].iter().any(|&v| self.balance[v] != 0) {
            return;
        }
        if i == self.arcs.len() {
            if !self.chosen.is_empty() && weakly_connected(self.m, &self.chosen) {
                self.found.push(smallest_circuit(&self.chosen));
            }
            return;
        }
        self.descend(i + 1);
        let (a, b) = self.arcs[i];
        self.balance[a] += 1;
        self.balance[b] -= 1;
        self.chosen.push((a, b));
        self.descend(i + 1);
        self.chosen.pop();
        self.balance[a] -= 1;
        self.balance[b] += 1;
    }
}

fn weakly_connected(m: usize, arcs: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(a, b) in arcs {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    let root = find(&mut parent, arcs[0].0);
    arcs.iter().all(|&(a, _)| find(&mut parent, a) == root)
}

/// Lexicographically smallest Eulerian circuit of a balanced connected arc
/// set, as a type sequence starting at its smallest vertex.
fn smallest_circuit(arcs: &[(usize, usize)]) -> Vec<usize> {
    let mut sorted = arcs.to_vec();
    sorted.sort_unstable();
    let start = sorted[0].0;
    let mut used = vec![false; sorted.len()];
    let mut path = vec![start];

    fn extend(
        sorted: &[(usize, usize)],
        used: &mut [bool],
        path: &mut Vec<usize>,
        start: usize,
    ) -> bool {
        if path.len() == sorted.len() + 1 {
            return *path.last().unwrap() == start;
        }
        let here = *path.last().unwrap();
        for i in 0..sorted.len() {
            if used[i] || sorted[i].0 != here {
                continue;
            }
            used[i] = true;
            path.push(sorted[i].1);
            if extend(sorted, used, path, start) {
                return true;
            }
            path.pop();
            used[i] = false;
        }
        false
    }

    let closed = extend(&sorted, &mut used, &mut path, start);
    debug_assert!(closed, "balanced connected arc set has an Eulerian circuit");
    path.pop();
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::*;
    use crate::model::validate;

    fn names(model: &Model, cycles: &[Cycle]) -> Vec<String> {
        cycles.iter().map(|c| c.name(model)).collect()
    }

    #[test]
    fn two_types_have_one_cycle() {
        let model = validate(&ising(1.0, 1.0)).unwrap();
        let cycles = enumerate_cycles(&model).unwrap();
        assert_eq!(names(&model, &cycles), ["X-ZZ"]);
        assert!((cycles[0].k() - 2.0).abs() < 1e-15);
        assert_eq!(cycles[0].xi(), 0.5);
    }

    #[test]
    fn three_types_have_nine_cycles() {
        let model = validate(&complete(3, 1.0, 1.0)).unwrap();
        let cycles = enumerate_cycles(&model).unwrap();
        let lengths: Vec<usize> = cycles.iter().map(Cycle::len).collect();
        assert_eq!(lengths, [2, 2, 2, 3, 3, 4, 4, 4, 6]);
        assert_eq!(
            names(&model, &cycles),
            [
                "T0-T1",
                "T0-T2",
                "T1-T2",
                "T0-T1-T2",
                "T0-T2-T1",
                "T0-T1-T0-T2",
                "T0-T1-T2-T1",
                "T0-T2-T1-T2",
                "T0-T1-T0-T2-T1-T2",
            ]
        );
        // both Eulerian circuits of the full graph are one cycle
        let full = cycles.last().unwrap();
        assert_eq!(full.arcs(), cycle_arcs(&[0, 1, 2, 0, 2, 1]).as_slice());
    }

    #[test]
    fn unit_weights_give_unit_stats() {
        let model = validate(&complete(3, 1.0, 1.0)).unwrap();
        for c in enumerate_cycles(&model).unwrap() {
            assert!((c.k() - 1.0).abs() < 1e-15);
            assert!((c.xi() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn missing_transitions_shrink_the_census() {
        let mut spec = complete(3, 1.0, 1.0);
        spec.transitions
            .retain(|t| !(t.from == "T0" && t.to == "T2"));
        let model = validate(&spec).unwrap();
        let cycles = enumerate_cycles(&model).unwrap();
        assert!(cycles.iter().all(|c| !c.arcs().contains(&(0, 2))));
        // 2-cycles T0-T1 and T1-T2, the 3-cycle through T2 -> T0, and T0-T1-T2-T1
        assert_eq!(cycles.len(), 4);
    }

    #[test]
    fn xy_stats_match_the_closed_forms() {
        let (j, d, s) = (1.3, 2.1, 0.5);
        let model = validate(&xy(j, d, s)).unwrap();
        let idx = |l: &str| model.index_of(l).unwrap();
        let (k, xi) = cycle_stats(&model, &[idx("X"), idx("Y")]).unwrap();
        assert!((k - 7.0 * j * s).abs() < 1e-12);
        assert_eq!(xi, 1.0);
        let (k, xi) = cycle_stats(&model, &[idx("X"), idx("Z")]).unwrap();
        assert!((k - (8.0 * j * d).sqrt() * s).abs() < 1e-12);
        assert_eq!(xi, 0.5);
        let (k, xi) = cycle_stats(&model, &[idx("X"), idx("Y"), idx("Z")]).unwrap();
        assert!((k - (56.0 * j * j * d).cbrt() * s).abs() < 1e-12);
        assert!((xi - 2.0 / 3.0).abs() < 1e-15);
        let (k, xi) = cycle_stats(&model, &[idx("X"), idx("Y"), idx("Z"), idx("Y")]).unwrap();
        assert!((k - (392.0 * j.powi(3) * d).powf(0.25) * s).abs() < 1e-12);
        assert_eq!(xi, 0.75);
    }

    #[test]
    fn xy_census_has_four_distinct_terms() {
        let model = validate(&xy(1.0, 3.0, 0.5)).unwrap();
        let cycles = enumerate_cycles(&model).unwrap();
        assert_eq!(cycles.len(), 9);
        let mut distinct: Vec<(f64, f64)> = Vec::new();
        for c in &cycles {
            if !distinct
                .iter()
                .any(|&(k, xi)| (k - c.k()).abs() < 1e-12 * k && (xi - c.xi()).abs() < 1e-12)
            {
                distinct.push((c.k(), c.xi()));
            }
        }
        assert_eq!(distinct.len(), 4);
    }

    #[test]
    fn rotation_keeps_stats() {
        let model = validate(&xy(0.7, 2.0, 0.5)).unwrap();
        for c in enumerate_cycles(&model).unwrap() {
            let mut seq = c.sequence().to_vec();
            for _ in 0..seq.len() {
                seq.rotate_left(1);
                let (k, xi) = cycle_stats(&model, &seq).unwrap();
                assert!((k - c.k()).abs() < 1e-12 * k);
                assert!((xi - c.xi()).abs() < 1e-12);
                assert_eq!(cycle_arcs(&seq), c.arcs());
            }
        }
    }

    #[test]
    fn stats_errors() {
        let mut spec = ising(1.0, 1.0);
        for t in &mut spec.transitions {
            t.d = 0.0;
        }
        let model = validate(&spec).unwrap();
        assert!(matches!(
            cycle_stats(&model, &[0, 1]),
            Err(Error::ZeroXi(_))
        ));
        // enumeration still reports the cycle
        assert_eq!(enumerate_cycles(&model).unwrap()[0].xi(), 0.0);

        let mut spec = complete(3, 1.0, 1.0);
        spec.transitions
            .retain(|t| !(t.from == "T0" && t.to == "T2"));
        let model = validate(&spec).unwrap();
        assert!(matches!(cycle_stats(&model, &[0, 2]), Err(Error::ZeroK(_))));

        assert!(matches!(
            cycle_stats(&model, &[0]),
            Err(Error::InvalidCycle(_))
        ));
        assert!(matches!(
            cycle_stats(&model, &[0, 0, 1]),
            Err(Error::InvalidCycle(_))
        ));
        assert!(matches!(
            cycle_stats(&model, &[0, 1, 0, 1]),
            Err(Error::InvalidCycle(_))
        ));
        assert!(matches!(
            cycle_stats(&model, &[0, 7]),
            Err(Error::InvalidCycle(_))
        ));
    }

    #[test]
    fn arc_limit_is_enforced() {
        let model = validate(&complete(6, 1.0, 1.0)).unwrap();
        assert!(matches!(
            enumerate_cycles(&model),
            Err(Error::TooManyArcs { arcs: 30, .. })
        ));
    }

    #[test]
    fn log_space_k_survives_huge_couplings() {
        let mut spec = complete(3, 1.0, 1.0);
        for i in &mut spec.interactions {
            i.coupling = 1e200;
        }
        let model = validate(&spec).unwrap();
        for c in enumerate_cycles(&model).unwrap() {
            assert!((c.ln_k() - 1e200f64.ln()).abs() < 1e-9);
        }
    }
}
