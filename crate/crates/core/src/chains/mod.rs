//! Explicit finite models: cells with positions, local operators with
//! supports, and the cross-type adjacency that operator chains walk on.

mod count;
mod homogeneity;

pub use count::{
    check_count_bounds, count_chain_series, count_chains, BoundReport, BoundRow, ChainCount,
    LatticeConstants,
};
pub use homogeneity::{estimate_homogeneity, Homogeneity};

use std::collections::HashMap;

use serde::Serialize;

use crate::dynamics::Pauli;
use crate::error::{Error, Result};
use crate::model::{GraphKind, InteractionType, ModelSpec, SystemClass, Transition};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cell {
    pub name: String,
    pub position: [f64; 2],
}

/// `coefficient · ⊗ factors` on the spin sites; identity elsewhere.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalTerm {
    pub coefficient: f64,
    pub factors: Vec<(usize, Pauli)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Operator {
    pub type_index: usize,
    /// Sorted cell indices.
    pub support: Vec<usize>,
    /// Set by the builders for operators far enough from the edge to see the
    /// bulk neighbourhood.
    pub interior: bool,
    pub term: LocalTerm,
}

#[derive(Clone, Debug)]
pub struct ExplicitGraphModel {
    labels: Vec<String>,
    cells: Vec<Cell>,
    operators: Vec<Operator>,
    step_distance: Vec<Vec<f64>>,
    range: f64,
    site_cells: Vec<usize>,
    neighbours: Vec<Vec<usize>>,
}

fn l1(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).abs() + (a[1] - b[1]).abs()
}

impl ExplicitGraphModel {
    /// Checks the pieces and builds the cross-type adjacency. Operators of
    /// one type are never adjacent to each other. `site_cells[q]` is the cell
    /// holding spin site `q`.
    pub fn new(
        labels: Vec<String>,
        cells: Vec<Cell>,
        mut operators: Vec<Operator>,
        step_distance: Vec<Vec<f64>>,
        range: f64,
        site_cells: Vec<usize>,
    ) -> Result<Self> {
        let m = labels.len();
        let sites = site_cells.len();
        let bad = |msg: String| Err(Error::InvalidGraph(msg));
        if step_distance.len() != m || step_distance.iter().any(|row| row.len() != m) {
            return bad(format!("step distance table must be {m}x{m}"));
        }
        if site_cells.iter().any(|&c| c >= cells.len()) {
            return bad("a spin site points at an unknown cell".into());
        }
        for (k, op) in operators.iter_mut().enumerate() {
            op.support.sort_unstable();
            op.support.dedup();
            if op.type_index >= m {
                return bad(format!("operator {k} has type {} of {m}", op.type_index));
            }
            if op.support.is_empty() {
                return bad(format!("operator {k} has an empty support"));
            }
            if let Some(&c) = op.support.iter().find(|&&c| c >= cells.len()) {
                return bad(format!("operator {k} touches unknown cell {c}"));
            }
            if let Some(&(q, _)) = op.term.factors.iter().find(|(q, _)| *q >= sites) {
                return bad(format!("operator {k} acts on site {q} of {sites}"));
            }
            for (i, &a) in op.support.iter().enumerate() {
                for &b in &op.support[i + 1..] {
                    if l1(cells[a].position, cells[b].position) > range + 1e-12 {
                        return bad(format!("operator {k} is wider than the range {range}"));
                    }
                }
            }
        }

        let mut by_cell: Vec<Vec<usize>> = vec![Vec::new(); cells.len()];
        for (k, op) in operators.iter().enumerate() {
            for &c in &op.support {
                by_cell[c].push(k);
            }
        }
        let neighbours = operators
            .iter()
            .map(|op| {
                let mut adj: Vec<usize> = op
                    .support
                    .iter()
                    .flat_map(|&c| &by_cell[c])
                    .copied()
                    .filter(|&o| operators[o].type_index != op.type_index)
                    .collect();
                adj.sort_unstable();
                adj.dedup();
                adj
            })
            .collect();

        Ok(ExplicitGraphModel {
            labels,
            cells,
            operators,
            step_distance,
            range,
            site_cells,
            neighbours,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn operators(&self) -> &[Operator] {
        &self.operators
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    /// Largest support diameter allowed.
    pub fn range(&self) -> f64 {
        self.range
    }

    /// Number of spin-½ sites the local terms act on.
    pub fn sites(&self) -> usize {
        self.site_cells.len()
    }

    pub fn site_cell(&self, site: usize) -> usize {
        self.site_cells[site]
    }

    /// Operators of other types whose support meets this one's.
    pub fn neighbours(&self, op: usize) -> &[usize] {
        &self.neighbours[op]
    }

    pub fn step_distance(&self, from: usize, to: usize) -> f64 {
        self.step_distance[from][to]
    }

    pub fn cell_index(&self, name: &str) -> Option<usize> {
        self.cells.iter().position(|c| c.name == name)
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        l1(self.cells[a].position, self.cells[b].position)
    }

    pub fn region_distance(&self, p: &[usize], q: &[usize]) -> f64 {
        p.iter()
            .flat_map(|&a| q.iter().map(move |&b| (a, b)))
            .map(|(a, b)| self.distance(a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether each operator's support meets the region.
    pub fn touching(&self, region: &[usize]) -> Vec<bool> {
        self.operators
            .iter()
            .map(|op| op.support.iter().any(|c| region.contains(c)))
            .collect()
    }

    /// `ν`: the largest number of operators adjacent to any one operator.
    pub fn max_degree(&self) -> usize {
        self.neighbours.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Number of neighbours of `op` that have type `to`.
    pub fn branching(&self, op: usize, to: usize) -> usize {
        self.neighbours[op]
            .iter()
            .filter(|&&o| self.operators[o].type_index == to)
            .count()
    }

    /// Keeps the operators where `keep` is true; cells are unchanged.
    pub fn restrict(&self, keep: &[bool]) -> Result<Self> {
        let ops = self
            .operators
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(op, _)| op.clone())
            .collect();
        Self::new(
            self.labels.clone(),
            self.cells.clone(),
            ops,
            self.step_distance.clone(),
            self.range,
            self.site_cells.clone(),
        )
    }

    pub(crate) fn check_region(&self, region: &[usize], name: &str) -> Result<()> {
        if region.is_empty() {
            return Err(Error::InvalidGraph(format!("{name} region is empty")));
        }
        if let Some(c) = region.iter().find(|&&c| c >= self.cells.len()) {
            return Err(Error::InvalidGraph(format!(
                "{name} region has unknown cell {c}"
            )));
        }
        Ok(())
    }

    /// Parses comma-separated cell names.
    pub fn parse_region(&self, spec: &str) -> Result<Vec<usize>> {
        spec.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|name| {
                self.cell_index(name)
                    .ok_or_else(|| Error::InvalidGraph(format!("no cell named `{name}`")))
            })
            .collect()
    }

    /// Transition counts seen from interior operators.
    pub fn interior_table(&self) -> Result<Vec<MeasuredTransition>> {
        let m = self.labels.len();
        let mut table = Vec::new();
        for from in 0..m {
            let interior: Vec<usize> = (0..self.len())
                .filter(|&k| self.operators[k].interior && self.operators[k].type_index == from)
                .collect();
            if interior.is_empty() {
                return Err(Error::InvalidGraph(format!(
                    "no interior operators of type `{}`",
                    self.labels[from]
                )));
            }
            for to in (0..m).filter(|&t| t != from) {
                let counts: Vec<usize> = interior.iter().map(|&k| self.branching(k, to)).collect();
                let n_min = *counts.iter().min().expect("nonempty");
                let n_max = *counts.iter().max().expect("nonempty");
                table.push(MeasuredTransition {
                    from,
                    to,
                    n_min,
                    n_max,
                    d: self.step_distance[from][to],
                });
            }
        }
        Ok(table)
    }

    /// A lattice model built from the interior table. Fails if interior
    /// operators of one type disagree on a count.
    pub fn to_model_spec(&self, couplings: &[f64]) -> Result<ModelSpec> {
        if couplings.len() != self.labels.len() {
            return Err(Error::DimensionMismatch(couplings.len(), self.labels.len()));
        }
        let table = self.interior_table()?;
        if let Some(t) = table.iter().find(|t| t.n_min != t.n_max) {
            return Err(Error::InvalidGraph(format!(
                "interior counts for {} -> {} range over {}..{}",
                self.labels[t.from], self.labels[t.to], t.n_min, t.n_max
            )));
        }
        Ok(ModelSpec {
            system_class: SystemClass::Bounded,
            graph_kind: GraphKind::Lattice,
            interactions: self
                .labels
                .iter()
                .zip(couplings)
                .map(|(label, &coupling)| InteractionType {
                    label: label.clone(),
                    coupling,
                })
                .collect(),
            transitions: table
                .iter()
                .filter(|t| t.n_max > 0)
                .map(|t| Transition {
                    from: self.labels[t.from].clone(),
                    to: self.labels[t.to].clone(),
                    n: t.n_max as f64,
                    d: t.d,
                    k: None,
                })
                .collect(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasuredTransition {
    pub from: usize,
    pub to: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub d: f64,
}

fn pauli_term(coefficient: f64, factors: &[(usize, Pauli)]) -> LocalTerm {
    LocalTerm {
        coefficient,
        factors: factors.to_vec(),
    }
}

/// Transverse-field Ising chain `−J (g Σ σˣ_i + Σ σᶻ_i σᶻ_{i+1})` with open
/// ends. Type 0 (`X`) sits on sites, type 1 (`ZZ`) on bonds; both steps move
/// half a lattice spacing.
pub fn build_ising_chain(sites: usize) -> Result<ExplicitGraphModel> {
    if sites < 2 {
        return Err(Error::TooSmall {
            what: "Ising chain",
            min: 2,
            got: sites,
        });
    }
    let cells = (0..sites)
        .map(|i| Cell {
            name: format!("s{i}"),
            position: [i as f64, 0.0],
        })
        .collect();
    let inner = |i: usize| i > 0 && i + 1 < sites;
    let mut ops: Vec<Operator> = (0..sites)
        .map(|i| Operator {
            type_index: 0,
            support: vec![i],
            interior: inner(i),
            term: pauli_term(-1.0, &[(i, Pauli::X)]),
        })
        .collect();
    ops.extend((0..sites - 1).map(|i| Operator {
        type_index: 1,
        support: vec![i, i + 1],
        interior: inner(i) && inner(i + 1),
        term: pauli_term(-1.0, &[(i, Pauli::Z), (i + 1, Pauli::Z)]),
    }));
    ExplicitGraphModel::new(
        vec!["X".into(), "ZZ".into()],
        cells,
        ops,
        vec![vec![0.0, 0.5], vec![0.5, 0.0]],
        1.0,
        (0..sites).collect(),
    )
}

/// Spin-½ XY model on a `rows × cols` patch of the square lattice.
///
/// Cells are sites `s{r}_{c}`, horizontal bonds `h{r}_{c}` (to the right of
/// the site), vertical bonds `v{r}_{c}` (below it) and plaquettes `p{r}_{c}`
/// (below and to the right). `X` and `Y` operators sit on bonds and cover the
/// bond and its two sites; `Z` operators sit on plaquettes and cover the
/// plaquette and its four bonds. With this layout a bulk bond meets two
/// plaquettes and seven bonds (itself included), and a plaquette meets four
/// bonds. Since `(Sᶻ)²` is a quarter of the identity for spin ½, the `Z`
/// terms only shift the energy.
pub fn build_xy_lattice(rows: usize, cols: usize) -> Result<ExplicitGraphModel> {
    for n in [rows, cols] {
        if n < 2 {
            return Err(Error::TooSmall {
                what: "XY lattice side",
                min: 2,
                got: n,
            });
        }
    }
    let mut cells = Vec::new();
    let mut index = HashMap::new();
    let mut add = |name: String, x: f64, y: f64| {
        index.insert(name.clone(), cells.len());
        cells.push(Cell {
            name,
            position: [x, y],
        });
    };
    for r in 0..rows {
        for c in 0..cols {
            let (x, y) = (c as f64, r as f64);
            add(format!("s{r}_{c}"), x, y);
            if c + 1 < cols {
                add(format!("h{r}_{c}"), x + 0.5, y);
            }
            if r + 1 < rows {
                add(format!("v{r}_{c}"), x, y + 0.5);
            }
            if r + 1 < rows && c + 1 < cols {
                add(format!("p{r}_{c}"), x + 0.5, y + 0.5);
            }
        }
    }
    let cell = |name: String| index[&name];
    let site = |r: usize, c: usize| r * cols + c;
    let inner = |r: usize, c: usize| r > 0 && c > 0 && r + 1 < rows && c + 1 < cols;

    let mut bonds = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                bonds.push((format!("h{r}_{c}"), (r, c), (r, c + 1)));
            }
            if r + 1 < rows {
                bonds.push((format!("v{r}_{c}"), (r, c), (r + 1, c)));
            }
        }
    }
    let mut ops = Vec::new();
    for (type_index, pauli) in [(0, Pauli::X), (1, Pauli::Y)] {
        for (name, a, b) in &bonds {
            ops.push(Operator {
                type_index,
                support: vec![
                    cell(name.clone()),
                    cell(format!("s{}_{}", a.0, a.1)),
                    cell(format!("s{}_{}", b.0, b.1)),
                ],
                interior: inner(a.0, a.1) && inner(b.0, b.1),
                term: pauli_term(0.25, &[(site(a.0, a.1), pauli), (site(b.0, b.1), pauli)]),
            });
        }
    }
    for r in 0..rows - 1 {
        for c in 0..cols - 1 {
            ops.push(Operator {
                type_index: 2,
                support: vec![
                    cell(format!("p{r}_{c}")),
                    cell(format!("h{r}_{c}")),
                    cell(format!("h{}_{c}", r + 1)),
                    cell(format!("v{r}_{c}")),
                    cell(format!("v{r}_{}", c + 1)),
                ],
                interior: inner(r, c) && inner(r + 1, c + 1),
                term: pauli_term(0.25, &[]),
            });
        }
    }
    ExplicitGraphModel::new(
        vec!["X".into(), "Y".into(), "Z".into()],
        cells,
        ops,
        vec![
            vec![0.0, 1.0, 0.5],
            vec![1.0, 0.0, 0.5],
            vec![0.5, 0.5, 0.0],
        ],
        1.0,
        (0..rows * cols)
            .map(|q| cell(format!("s{}_{}", q / cols, q % cols)))
            .collect(),
    )
}
