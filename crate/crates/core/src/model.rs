//! Declarative Hamiltonian description and the constants derived from it.
//!
//! A model lists interaction types (one coupling constant each) and the
//! transition table between types: how many operators of type `to` overlap a
//! given operator of type `from` (`n`), how far a chain moves when it takes
//! that step (`D`), and for commutator-bounded systems the bound `K` on the
//! commutator of the two operator types.
//!
//! Operator norms are absorbed into the couplings, so a model file carries no
//! separate norm field.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemClass {
    Bounded,
    CommutatorBounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKind {
    Lattice,
    HomogeneousIsotropic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionType {
    pub label: String,
    pub coupling: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub from: String,
    pub to: String,
    pub n: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
}

/// The model file as written by the user. Labels are the join keys; the order
/// of interactions and transitions carries no meaning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub system_class: SystemClass,
    pub graph_kind: GraphKind,
    pub interactions: Vec<InteractionType>,
    pub transitions: Vec<Transition>,
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model spec serializes")
    }

    pub fn coupling_mut(&mut self, label: &str) -> Option<&mut f64> {
        self.interactions
            .iter_mut()
            .find(|i| i.label == label)
            .map(|i| &mut i.coupling)
    }
}

/// The constant `C` multiplying `L(λ)/λ` in the bound exponent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpeedConstant(f64);

impl SpeedConstant {
    pub fn new(class: SystemClass, interactions: usize) -> Self {
        let branches = interactions.saturating_sub(1) as f64;
        match class {
            SystemClass::Bounded => SpeedConstant(2.0 * branches),
            SystemClass::CommutatorBounded => SpeedConstant(8f64.sqrt() * branches),
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A validated, normalized model with dense `m × m` transition tables.
///
/// Interaction indices follow the label order of the normalized spec.
#[derive(Clone, Debug)]
pub struct Model {
    spec: ModelSpec,
    labels: Vec<String>,
    couplings: Vec<f64>,
    counts: Vec<f64>,
    distances: Vec<f64>,
    commutators: Vec<f64>,
    constant: SpeedConstant,
}

impl Model {
    /// The normalized spec: pruned, sorted by label, only nonzero transitions.
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    /// Number of retained interaction types, `m`.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn system_class(&self) -> SystemClass {
        self.spec.system_class
    }

    pub fn graph_kind(&self) -> GraphKind {
        self.spec.graph_kind
    }

    pub fn coupling(&self, index: usize) -> f64 {
        self.couplings[index]
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn count(&self, from: usize, to: usize) -> f64 {
        self.counts[from * self.len() + to]
    }

    pub fn distance(&self, from: usize, to: usize) -> f64 {
        self.distances[from * self.len() + to]
    }

    /// `K` for commutator-bounded systems, 1 otherwise.
    pub fn commutator_bound(&self, from: usize, to: usize) -> f64 {
        self.commutators[from * self.len() + to]
    }

    pub fn speed_constant(&self) -> SpeedConstant {
        self.constant
    }

    /// Transitions with a nonzero count, in `(from, to)` index order.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.len();
        (0..m)
            .flat_map(move |a| (0..m).map(move |b| (a, b)))
            .filter(move |&(a, b)| a != b && self.count(a, b) > 0.0)
    }

    /// `ln(h_from · n · K)`: the log-weight a cycle collects when it takes
    /// the step `from -> to`.
    pub(crate) fn ln_step_weight(&self, from: usize, to: usize) -> f64 {
        (self.coupling(from) * self.count(from, to) * self.commutator_bound(from, to)).ln()
    }
}

fn check_value(field: impl FnOnce() -> String, value: f64, allow_zero: bool) -> Result<()> {
    let ok = value.is_finite()
        && if allow_zero {
            value >= 0.0
        } else {
            value > 0.0
        };
    if ok {
        Ok(())
    } else {
        Err(Error::NegativeValue {
            field: field(),
            value,
        })
    }
}

/// Validates and normalizes a raw model.
///
/// Interactions with zero coupling, and interactions left without any nonzero
/// transition, are pruned rather than rejected, so that parameter sweeps may
/// cross a zero coupling. The retained transition graph must be strongly
/// connected.
pub fn validate(spec: &ModelSpec) -> Result<Model> {
    let mut seen = HashSet::new();
    for (i, interaction) in spec.interactions.iter().enumerate() {
        if !seen.insert(interaction.label.as_str()) {
            return Err(Error::DuplicateLabel(interaction.label.clone()));
        }
        check_value(
            || format!("interactions[{i}].coupling ({})", interaction.label),
            interaction.coupling,
            true,
        )?;
    }

    let mut table: BTreeMap<(&str, &str), &Transition> = BTreeMap::new();
    for t in &spec.transitions {
        for label in [&t.from, &t.to] {
            if !seen.contains(label.as_str()) {
                return Err(Error::UnknownLabel(label.clone()));
            }
        }
        if t.from == t.to {
            return Err(Error::SelfTransition(t.from.clone()));
        }
        let name = || format!("{} -> {}", t.from, t.to);
        check_value(|| format!("transition {}: n", name()), t.n, true)?;
        check_value(|| format!("transition {}: D", name()), t.d, true)?;
        if let Some(k) = t.k {
            check_value(|| format!("transition {}: K", name()), k, false)?;
        }
        if spec.graph_kind == GraphKind::Lattice && t.n.fract() != 0.0 {
            return Err(Error::NonIntegerCount {
                field: format!("transition {}: n", name()),
                value: t.n,
            });
        }
        if table.insert((&t.from, &t.to), t).is_some() {
            return Err(Error::DuplicateTransition {
                from: t.from.clone(),
                to: t.to.clone(),
            });
        }
    }

    // Prune to a fixed point: zero couplings first, then types that lost
    // every transition.
    let mut retained: HashSet<&str> = spec
        .interactions
        .iter()
        .filter(|i| i.coupling > 0.0)
        .map(|i| i.label.as_str())
        .collect();
    loop {
        let touched: HashSet<&str> = table
            .iter()
            .filter(|((a, b), t)| t.n > 0.0 && retained.contains(a) && retained.contains(b))
            .flat_map(|((a, b), _)| [*a, *b])
            .collect();
        if touched.len() == retained.len() {
            break;
        }
        retained = touched;
    }

    let mut labels: Vec<String> = retained.iter().map(|s| s.to_string()).collect();
    labels.sort();
    let m = labels.len();
    if m < 2 {
        return Err(Error::EmptyModel { retained: m });
    }
    let index: HashMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();

    let couplings: Vec<f64> = labels
        .iter()
        .map(|l| {
            spec.interactions
                .iter()
                .find(|i| &i.label == l)
                .map(|i| i.coupling)
                .expect("retained label exists")
        })
        .collect();

    let mut counts = vec![0.0; m * m];
    let mut distances = vec![0.0; m * m];
    let mut commutators = vec![1.0; m * m];
    let mut transitions = Vec::new();
    for ((a, b), t) in &table {
        let (Some(&ia), Some(&ib)) = (index.get(a), index.get(b)) else {
            continue;
        };
        if t.n == 0.0 {
            continue;
        }
        if spec.system_class == SystemClass::CommutatorBounded {
            match t.k {
                Some(k) => commutators[ia * m + ib] = k,
                None => {
                    return Err(Error::MissingK {
                        from: t.from.clone(),
                        to: t.to.clone(),
                    })
                }
            }
        }
        counts[ia * m + ib] = t.n;
        distances[ia * m + ib] = t.d;
        transitions.push((ia, ib, (*t).clone()));
    }
    transitions.sort_by_key(|&(a, b, _)| (a, b));

    check_strongly_connected(&labels, &counts)?;

    let normalized = ModelSpec {
        system_class: spec.system_class,
        graph_kind: spec.graph_kind,
        interactions: labels
            .iter()
            .zip(&couplings)
            .map(|(label, &coupling)| InteractionType {
                label: label.clone(),
                coupling,
            })
            .collect(),
        transitions: transitions.into_iter().map(|(_, _, t)| t).collect(),
    };

    Ok(Model {
        constant: SpeedConstant::new(spec.system_class, m),
        spec: normalized,
        labels,
        couplings,
        counts,
        distances,
        commutators,
    })
}

fn check_strongly_connected(labels: &[String], counts: &[f64]) -> Result<()> {
    let m = labels.len();
    let reach = |forward: bool| {
        let mut seen = vec![false; m];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(a) = stack.pop() {
            for b in 0..m {
                let w = if forward {
                    counts[a * m + b]
                } else {
                    counts[b * m + a]
                };
                if w > 0.0 && !seen[b] {
                    seen[b] = true;
                    stack.push(b);
                }
            }
        }
        seen
    };
    for seen in [reach(true), reach(false)] {
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::Disconnected {
                label: labels[i].clone(),
            });
        }
    }
    Ok(())
}

/// `N_{from,to}(λ) = n · K · h_to · e^{λD}`, and 0 on the diagonal.
pub fn transition_factor(model: &Model, from: usize, to: usize, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidLambda(lambda));
    }
    if from == to {
        return Ok(0.0);
    }
    Ok(model.count(from, to)
        * model.commutator_bound(from, to)
        * model.coupling(to)
        * (lambda * model.distance(from, to)).exp())
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ising_is_valid_with_c_two() {
        let model = validate(&ising(1.0, 1.0)).unwrap();
        assert_eq!(model.len(), 2);
        assert_eq!(model.speed_constant().value(), 2.0);
    }

    #[test]
    fn xy_is_valid_with_c_four() {
        let model = validate(&xy(1.0, 1.0, 0.5)).unwrap();
        assert_eq!(model.len(), 3);
        assert_eq!(model.speed_constant().value(), 4.0);
    }

    #[test]
    fn zero_coupling_prunes_the_interaction() {
        let model = validate(&xy(1.0, 0.0, 0.5)).unwrap();
        assert_eq!(model.labels(), ["X", "Y"]);
        assert_eq!(model.speed_constant().value(), 2.0);
        assert!(model
            .spec()
            .transitions
            .iter()
            .all(|t| t.to != "Z" && t.from != "Z"));
    }

    #[test]
    fn too_few_types_after_pruning() {
        let err = validate(&ising(0.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::EmptyModel { retained: 0 }), "{err}");
    }

    #[test]
    fn one_way_transitions_are_disconnected() {
        let mut spec = xy(1.0, 1.0, 0.5);
        spec.transitions.retain(|t| !(t.to == "X"));
        let err = validate(&spec).unwrap_err();
        assert!(matches!(err, Error::Disconnected { .. }), "{err}");
    }

    #[test]
    fn commutator_bounded_needs_k() {
        let mut spec = ising(1.0, 1.0);
        spec.system_class = SystemClass::CommutatorBounded;
        assert!(matches!(validate(&spec), Err(Error::MissingK { .. })));
        for t in &mut spec.transitions {
            t.k = Some(2.0);
        }
        let model = validate(&spec).unwrap();
        assert!((model.speed_constant().value() - 8f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn negative_values_are_rejected() {
        let mut spec = ising(1.0, 1.0);
        spec.transitions[0].d = -0.5;
        assert!(matches!(validate(&spec), Err(Error::NegativeValue { .. })));
        let mut spec = ising(1.0, 1.0);
        spec.interactions[0].coupling = -1.0;
        assert!(matches!(validate(&spec), Err(Error::NegativeValue { .. })));
        let mut spec = ising(1.0, 1.0);
        spec.transitions[0].n = f64::NAN;
        assert!(matches!(validate(&spec), Err(Error::NegativeValue { .. })));
    }

    #[test]
    fn structural_errors() {
        let mut spec = ising(1.0, 1.0);
        spec.transitions.push(transition("X", "X", 1.0, 1.0));
        assert!(matches!(validate(&spec), Err(Error::SelfTransition(_))));

        let mut spec = ising(1.0, 1.0);
        spec.transitions.push(transition("X", "ZZ", 1.0, 1.0));
        assert!(matches!(
            validate(&spec),
            Err(Error::DuplicateTransition { .. })
        ));

        let mut spec = ising(1.0, 1.0);
        spec.transitions.push(transition("X", "Q", 1.0, 1.0));
        assert!(matches!(validate(&spec), Err(Error::UnknownLabel(_))));

        let mut spec = ising(1.0, 1.0);
        spec.interactions.push(interaction("X", 2.0));
        assert!(matches!(validate(&spec), Err(Error::DuplicateLabel(_))));

        let mut spec = ising(1.0, 1.0);
        spec.transitions[0].n = 1.5;
        assert!(matches!(
            validate(&spec),
            Err(Error::NonIntegerCount { .. })
        ));
        spec.graph_kind = GraphKind::HomogeneousIsotropic;
        assert!(validate(&spec).is_ok());
    }

    #[test]
    fn file_order_does_not_matter() {
        let a = ising(2.0, 1.0);
        let mut b = a.clone();
        b.interactions.reverse();
        b.transitions.reverse();
        assert_eq!(validate(&a).unwrap().spec(), validate(&b).unwrap().spec());
    }

    #[test]
    fn transition_factor_examples() {
        let mut spec = ising(3.0, 1.0);
        spec.transitions[1].d = 0.5;
        let model = validate(&spec).unwrap();
        let x = model.index_of("X").unwrap();
        let zz = model.index_of("ZZ").unwrap();
        // n = 2, h_to = 3, D = 1/2, λ = 2
        let f = transition_factor(&model, zz, x, 2.0).unwrap();
        assert!((f - 6.0 * std::f64::consts::E).abs() < 1e-12);
        assert!((f - 16.3097).abs() < 1e-4);
        // λ -> 0+ leaves n · h_to
        let f = transition_factor(&model, x, zz, 1e-12).unwrap();
        assert!((f - 2.0).abs() < 1e-9);
        assert_eq!(transition_factor(&model, x, x, 1.0).unwrap(), 0.0);
        assert!(matches!(
            transition_factor(&model, x, zz, 0.0),
            Err(Error::InvalidLambda(_))
        ));
        assert!(matches!(
            transition_factor(&model, x, zz, -1.0),
            Err(Error::InvalidLambda(_))
        ));
    }

    #[test]
    fn json_round_trip_uses_file_keys() {
        let text = r#"{
            "system_class": "commutator-bounded",
            "graph_kind": "homogeneous-isotropic",
            "interactions": [{"label": "a", "coupling": 1.5}, {"label": "b", "coupling": 2}],
            "transitions": [
                {"from": "a", "to": "b", "n": 2, "D": 0.5, "K": 2},
                {"from": "b", "to": "a", "n": 3, "D": 1, "K": 2}
            ]
        }"#;
        let spec = ModelSpec::from_json(text).unwrap();
        assert_eq!(spec.system_class, SystemClass::CommutatorBounded);
        assert_eq!(spec.transitions[1].k, Some(2.0));
        let back = ModelSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(back, spec);
        assert!(ModelSpec::from_json(r#"{"system_class": "bounded"}"#).is_err());
    }

    fn arb_two_type() -> impl Strategy<Value = ModelSpec> {
        (
            0.0..3.0f64,
            0.0..3.0f64,
            0u8..4,
            1u8..4,
            0.0..2.0f64,
            0.0..2.0f64,
        )
            .prop_map(|(h0, h1, n01, n10, d0, d1)| ModelSpec {
                system_class: SystemClass::Bounded,
                graph_kind: GraphKind::Lattice,
                interactions: vec![
                    interaction("p", h0),
                    interaction("q", h1),
                    interaction("r", 1.0),
                ],
                transitions: vec![
                    transition("p", "q", n01 as f64, d0),
                    transition("q", "p", n10 as f64, d1),
                    transition("q", "r", 1.0, 1.0),
                    transition("r", "q", 1.0, 1.0),
                ],
            })
    }

    proptest! {
        #[test]
        fn validate_is_idempotent(spec in arb_two_type()) {
            if let Ok(model) = validate(&spec) {
                let again = validate(model.spec()).unwrap();
                prop_assert_eq!(again.spec(), model.spec());
            }
        }

        #[test]
        fn transition_factor_monotone_in_lambda(l1 in 1e-3..5.0f64, dl in 1e-3..5.0f64, d in 0.0..2.0f64) {
            let mut spec = ising(1.3, 0.7);
            spec.transitions[0].d = d;
            let model = validate(&spec).unwrap();
            let a = transition_factor(&model, 0, 1, l1).unwrap();
            let b = transition_factor(&model, 0, 1, l1 + dl).unwrap();
            if d > 0.0 { prop_assert!(b > a); } else { prop_assert_eq!(a, b); }
        }

        #[test]
        fn speed_constant_ratio(m in 2usize..40) {
            let bounded = SpeedConstant::new(SystemClass::Bounded, m).value();
            let comm = SpeedConstant::new(SystemClass::CommutatorBounded, m).value();
            prop_assert!((bounded / comm - 0.5f64.sqrt()).abs() < 1e-14);
        }
    }
}
