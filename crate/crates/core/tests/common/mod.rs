#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use lrbound::chains::ExplicitGraphModel;
use lrbound::model::{GraphKind, InteractionType, ModelSpec, SystemClass, Transition};

pub fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

pub fn load(name: &str) -> ModelSpec {
    ModelSpec::from_path(models_dir().join(name)).expect("shipped model loads")
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// A lattice spec from `(label, coupling)` and `(from, to, n, D)` rows.
pub fn spec(interactions: &[(&str, f64)], transitions: &[(&str, &str, f64, f64)]) -> ModelSpec {
    ModelSpec {
        system_class: SystemClass::Bounded,
        graph_kind: GraphKind::Lattice,
        interactions: interactions
            .iter()
            .map(|&(label, coupling)| InteractionType {
                label: label.into(),
                coupling,
            })
            .collect(),
        transitions: transitions
            .iter()
            .map(|&(from, to, n, d)| Transition {
                from: from.into(),
                to: to.into(),
                n,
                d,
                k: None,
            })
            .collect(),
    }
}

/// XY model with `h_X = h_Y = J S` and `h_Z = D S`.
pub fn xy(j: f64, d: f64, s: f64) -> ModelSpec {
    spec(
        &[("X", j * s), ("Y", j * s), ("Z", d * s)],
        &[
            ("X", "Y", 7.0, 1.0),
            ("Y", "X", 7.0, 1.0),
            ("X", "Z", 2.0, 0.5),
            ("Y", "Z", 2.0, 0.5),
            ("Z", "X", 4.0, 0.5),
            ("Z", "Y", 4.0, 0.5),
        ],
    )
}

pub fn ising(g: f64, j: f64) -> ModelSpec {
    spec(
        &[("X", g * j), ("ZZ", j)],
        &[("X", "ZZ", 2.0, 0.5), ("ZZ", "X", 2.0, 0.5)],
    )
}

/// Every elementary cycle as a sorted arc list, found by walking: from each
/// start vertex, follow unused arcs depth-first and record the arc set each
/// time the walk closes. Slow, but it shares nothing with the library's
/// subset search.
pub fn trail_census(m: usize, arcs: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    fn walk(
        start: usize,
        at: usize,
        arcs: &[(usize, usize)],
        used: &mut Vec<bool>,
        trail: &mut Vec<(usize, usize)>,
        found: &mut BTreeSet<Vec<(usize, usize)>>,
    ) {
        for i in 0..arcs.len() {
            if used[i] || arcs[i].0 != at {
                continue;
            }
            used[i] = true;
            trail.push(arcs[i]);
            if arcs[i].1 == start {
                let mut set = trail.clone();
                set.sort_unstable();
                found.insert(set);
            }
            walk(start, arcs[i].1, arcs, used, trail, found);
            trail.pop();
            used[i] = false;
        }
    }
    let mut found = BTreeSet::new();
    for start in 0..m {
        walk(
            start,
            start,
            arcs,
            &mut vec![false; arcs.len()],
            &mut Vec::new(),
            &mut found,
        );
    }
    found.into_iter().collect()
}

/// Chain counts by explicit enumeration, intersecting supports directly.
/// `counts[n - 1][p][q]` is the number of chains of `n` operators whose
/// first support holds cell `p` and last support holds cell `q`.
pub fn enumerate_chain_counts(model: &ExplicitGraphModel, n_max: usize) -> Vec<Vec<Vec<u64>>> {
    let ops = model.operators();
    let cells = model.cells().len();
    let meets = |a: usize, b: usize| {
        ops[a].type_index != ops[b].type_index
            && ops[a].support.iter().any(|c| ops[b].support.contains(c))
    };
    let mut counts = vec![vec![vec![0u64; cells]; cells]; n_max];
    let mut stack: Vec<usize> = Vec::new();
    fn go(
        ops_len: usize,
        meets: &dyn Fn(usize, usize) -> bool,
        first_support: &[usize],
        model: &ExplicitGraphModel,
        stack: &mut Vec<usize>,
        n_max: usize,
        counts: &mut [Vec<Vec<u64>>],
    ) {
        let last = *stack.last().unwrap();
        for &p in first_support {
            for &q in &model.operators()[last].support {
                counts[stack.len() - 1][p][q] += 1;
            }
        }
        if stack.len() == n_max {
            return;
        }
        for next in 0..ops_len {
            if meets(last, next) {
                stack.push(next);
                go(ops_len, meets, first_support, model, stack, n_max, counts);
                stack.pop();
            }
        }
    }
    for start in 0..ops.len() {
        stack.push(start);
        go(
            ops.len(),
            &meets,
            &ops[start].support,
            model,
            &mut stack,
            n_max,
            &mut counts,
        );
        stack.pop();
    }
    counts
}
