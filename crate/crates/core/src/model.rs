//! The reactive graph data model and its well-formedness check.
//!
//! A [`ReactiveGraph`] is the raw, string-keyed tuple as written by a user or
//! decoded from JSON. [`validate`] turns it into a [`ValidatedGraph`], which
//! interns states, actions and edges into dense indices in sorted-id order.
//! Every semantic operation works on the validated form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::edgeset::EdgeSet;

/// Index of a state in a [`ValidatedGraph`] (position in sorted state names).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateIx(pub usize);

/// Index of an edge in a [`ValidatedGraph`] (position in sorted edge ids).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeIx(pub usize);

/// Index of an action label in a [`ValidatedGraph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionIx(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarity {
    /// Activating hyper edge.
    On,
    /// Deactivating hyper edge.
    Off,
}

impl Polarity {
    pub fn keyword(self) -> &'static str {
        match self {
            Polarity::On => "enables",
            Polarity::Off => "disables",
        }
    }
}

/// What an edge id stands for.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeDetail {
    Ground {
        source: String,
        action: String,
        target: String,
    },
    Hyper {
        source: String,
        target: String,
        polarity: Polarity,
    },
}

impl EdgeDetail {
    pub fn is_hyper(&self) -> bool {
        matches!(self, EdgeDetail::Hyper { .. })
    }
}

/// Unchecked reactive graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReactiveGraph {
    pub name: String,
    pub states: BTreeSet<String>,
    pub actions: BTreeSet<String>,
    pub edges: BTreeMap<String, EdgeDetail>,
    pub init: String,
    pub active: BTreeSet<String>,
}

impl ReactiveGraph {
    /// A single-state graph without edges.
    pub fn new(name: impl Into<String>, init: impl Into<String>) -> Self {
        let init = init.into();
        ReactiveGraph {
            name: name.into(),
            states: BTreeSet::from([init.clone()]),
            actions: BTreeSet::new(),
            edges: BTreeMap::new(),
            init,
            active: BTreeSet::new(),
        }
    }

    /// Adds an initially active ground edge, declaring its endpoints and action.
    pub fn ground(mut self, id: &str, source: &str, action: &str, target: &str) -> Self {
        self.states.insert(source.to_string());
        self.states.insert(target.to_string());
        self.actions.insert(action.to_string());
        self.edges.insert(
            id.to_string(),
            EdgeDetail::Ground {
                source: source.to_string(),
                action: action.to_string(),
                target: target.to_string(),
            },
        );
        self.active.insert(id.to_string());
        self
    }

    /// Adds an initially active hyper edge.
    pub fn hyper(mut self, id: &str, source: &str, polarity: Polarity, target: &str) -> Self {
        self.edges.insert(
            id.to_string(),
            EdgeDetail::Hyper {
                source: source.to_string(),
                target: target.to_string(),
                polarity,
            },
        );
        self.active.insert(id.to_string());
        self
    }

    pub fn state(mut self, name: &str) -> Self {
        self.states.insert(name.to_string());
        self
    }

    pub fn inactive(mut self, id: &str) -> Self {
        self.active.remove(id);
        self
    }
}

/// A violation of reactive-graph well-formedness.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("the graph has no states")]
    NoStates,
    #[error("initial state `{0}` is not a declared state")]
    UnknownInitState(String),
    #[error("edge `{edge}` refers to undeclared edge `{reference}`")]
    DanglingEdgeRef { edge: String, reference: String },
    #[error("edge `{edge}` has the same detail as edge `{other}`")]
    DuplicateDetail { edge: String, other: String },
    #[error("initially active edge `{0}` is not a declared edge")]
    ActiveNotSubset(String),
    #[error("edge `{edge}` uses undeclared state `{state}`")]
    UnknownState { edge: String, state: String },
    #[error("edge `{edge}` uses undeclared action `{action}`")]
    UnknownAction { edge: String, action: String },
}

impl ModelError {
    /// The edge id the problem is attached to, if any.
    pub fn culprit_edge(&self) -> Option<&str> {
        match self {
            ModelError::DanglingEdgeRef { edge, .. }
            | ModelError::DuplicateDetail { edge, .. }
            | ModelError::UnknownState { edge, .. }
            | ModelError::UnknownAction { edge, .. } => Some(edge),
            ModelError::ActiveNotSubset(edge) => Some(edge),
            ModelError::NoStates | ModelError::UnknownInitState(_) => None,
        }
    }
}

/// Edge detail over interned indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Detail {
    Ground {
        source: StateIx,
        action: ActionIx,
        target: StateIx,
    },
    Hyper {
        source: EdgeIx,
        target: EdgeIx,
        polarity: Polarity,
    },
}

/// A reactive graph that satisfies every well-formedness invariant.
///
/// Immutable once built; all evolution happens in configurations.
#[derive(Clone, Debug)]
pub struct ValidatedGraph {
    model: ReactiveGraph,
    states: Vec<String>,
    actions: Vec<String>,
    edges: Vec<String>,
    details: Vec<Detail>,
    init: StateIx,
    active0: EdgeSet,
    hyper_from: Vec<Vec<EdgeIx>>,
    ground_from: Vec<Vec<EdgeIx>>,
}

/// Checks every invariant of `raw`, reporting all violations at once.
pub fn validate(raw: &ReactiveGraph) -> Result<ValidatedGraph, Vec<ModelError>> {
    let mut errors = Vec::new();
    if raw.states.is_empty() {
        errors.push(ModelError::NoStates);
    }
    if !raw.states.contains(&raw.init) {
        errors.push(ModelError::UnknownInitState(raw.init.clone()));
    }

    let mut seen: BTreeMap<&EdgeDetail, &str> = BTreeMap::new();
    for (id, detail) in &raw.edges {
        match detail {
            EdgeDetail::Ground {
                source,
                action,
                target,
            } => {
                for s in [source, target] {
                    if !raw.states.contains(s) {
                        errors.push(ModelError::UnknownState {
                            edge: id.clone(),
                            state: s.clone(),
                        });
                    }
                }
                if !raw.actions.contains(action) {
                    errors.push(ModelError::UnknownAction {
                        edge: id.clone(),
                        action: action.clone(),
                    });
                }
            }
            EdgeDetail::Hyper { source, target, .. } => {
                for r in [source, target] {
                    if !raw.edges.contains_key(r) {
                        errors.push(ModelError::DanglingEdgeRef {
                            edge: id.clone(),
                            reference: r.clone(),
                        });
                    }
                }
            }
        }
        if let Some(other) = seen.insert(detail, id) {
            // BTreeMap iteration is sorted, so `other` is the earlier id.
            seen.insert(detail, other);
            errors.push(ModelError::DuplicateDetail {
                edge: id.clone(),
                other: other.to_string(),
            });
        }
    }
    for id in &raw.active {
        if !raw.edges.contains_key(id) {
            errors.push(ModelError::ActiveNotSubset(id.clone()));
        }
    }
    if !errors.is_empty() {
        return Err(errors);
    }

    let states: Vec<String> = raw.states.iter().cloned().collect();
    let actions: Vec<String> = raw.actions.iter().cloned().collect();
    let edges: Vec<String> = raw.edges.keys().cloned().collect();
    let state_ix = |s: &str| StateIx(states.binary_search_by(|x| x.as_str().cmp(s)).unwrap());
    let action_ix = |a: &str| ActionIx(actions.binary_search_by(|x| x.as_str().cmp(a)).unwrap());
    let edge_ix = |e: &str| EdgeIx(edges.binary_search_by(|x| x.as_str().cmp(e)).unwrap());

    let details: Vec<Detail> = raw
        .edges
        .values()
        .map(|d| match d {
            EdgeDetail::Ground {
                source,
                action,
                target,
            } => Detail::Ground {
                source: state_ix(source),
                action: action_ix(action),
                target: state_ix(target),
            },
            EdgeDetail::Hyper {
                source,
                target,
                polarity,
            } => Detail::Hyper {
                source: edge_ix(source),
                target: edge_ix(target),
                polarity: *polarity,
            },
        })
        .collect();

    let mut hyper_from = vec![Vec::new(); edges.len()];
    let mut ground_from = vec![Vec::new(); states.len()];
    for (i, d) in details.iter().enumerate() {
        match *d {
            Detail::Hyper { source, .. } => hyper_from[source.0].push(EdgeIx(i)),
            Detail::Ground { source, .. } => ground_from[source.0].push(EdgeIx(i)),
        }
    }

    Ok(ValidatedGraph {
        init: state_ix(&raw.init),
        active0: raw.active.iter().map(|e| edge_ix(e)).collect(),
        model: raw.clone(),
        states,
        actions,
        edges,
        details,
        hyper_from,
        ground_from,
    })
}

impl ValidatedGraph {
    /// The raw model this graph was validated from.
    pub fn model(&self) -> &ReactiveGraph {
        &self.model
    }

    pub fn name(&self) -> &str {
        &self.model.name
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn action_count(&self) -> usize {
        self.actions.len()
    }

    pub fn ground_count(&self) -> usize {
        self.details
            .iter()
            .filter(|d| matches!(d, Detail::Ground { .. }))
            .count()
    }

    pub fn hyper_count(&self) -> usize {
        self.edge_count() - self.ground_count()
    }

    pub fn init(&self) -> StateIx {
        self.init
    }

    pub fn initial_active(&self) -> &EdgeSet {
        &self.active0
    }

    pub fn all_edges(&self) -> EdgeSet {
        EdgeSet::full(self.edges.len())
    }

    pub fn state_name(&self, s: StateIx) -> &str {
        &self.states[s.0]
    }

    pub fn action_name(&self, a: ActionIx) -> &str {
        &self.actions[a.0]
    }

    pub fn edge_name(&self, e: EdgeIx) -> &str {
        &self.edges[e.0]
    }

    pub fn state(&self, name: &str) -> Option<StateIx> {
        self.states
            .binary_search_by(|x| x.as_str().cmp(name))
            .ok()
            .map(StateIx)
    }

    pub fn edge(&self, id: &str) -> Option<EdgeIx> {
        self.edges
            .binary_search_by(|x| x.as_str().cmp(id))
            .ok()
            .map(EdgeIx)
    }

    pub fn action(&self, name: &str) -> Option<ActionIx> {
        self.actions
            .binary_search_by(|x| x.as_str().cmp(name))
            .ok()
            .map(ActionIx)
    }

    pub fn detail(&self, e: EdgeIx) -> Option<Detail> {
        self.details.get(e.0).copied()
    }

    pub fn states(&self) -> impl Iterator<Item = StateIx> {
        (0..self.states.len()).map(StateIx)
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeIx> {
        (0..self.edges.len()).map(EdgeIx)
    }

    pub fn is_hyper(&self, e: EdgeIx) -> bool {
        matches!(self.details.get(e.0), Some(Detail::Hyper { .. }))
    }

    /// Hyper edges whose source is `e`, ascending.
    pub(crate) fn hyper_from(&self, e: EdgeIx) -> &[EdgeIx] {
        &self.hyper_from[e.0]
    }

    /// Ground edges leaving `s`, ascending.
    pub(crate) fn ground_from(&self, s: StateIx) -> &[EdgeIx] {
        &self.ground_from[s.0]
    }

    /// Renders an edge set as `{a, b}` using edge ids.
    pub fn edge_set_names(&self, set: &EdgeSet) -> Vec<&str> {
        set.iter().map(|e| self.edge_name(e)).collect()
    }
}

impl fmt::Display for ModelErrors<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Display adapter for a list of validation errors, one per line.
pub struct ModelErrors<'a>(pub &'a [ModelError]);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn vending_machine_is_valid() {
        let g = validate(&fixtures::vending_machine()).unwrap();
        assert_eq!(g.state_count(), 3);
        assert_eq!(g.ground_count(), 4);
        assert_eq!(g.hyper_count(), 5);
        assert_eq!(g.initial_active().len(), 8);
        assert!(!g.initial_active().contains(g.edge("h4").unwrap()));
        assert_eq!(g.state_name(g.init()), "Insert");
    }

    #[test]
    fn undeclared_active_edge() {
        let mut raw = ReactiveGraph::new("X", "A");
        raw.active.insert("ghost".into());
        assert_eq!(
            validate(&raw).unwrap_err(),
            vec![ModelError::ActiveNotSubset("ghost".into())]
        );
    }

    #[test]
    fn duplicate_ground_triple() {
        let raw = ReactiveGraph::new("X", "A")
            .ground("a", "A", "go", "B")
            .ground("b", "A", "go", "B");
        let errs = validate(&raw).unwrap_err();
        assert_eq!(
            errs,
            vec![ModelError::DuplicateDetail {
                edge: "b".into(),
                other: "a".into()
            }]
        );
        assert_eq!(errs[0].culprit_edge(), Some("b"));
    }

    #[test]
    fn dangling_hyper_reference() {
        let raw = ReactiveGraph::new("X", "A").hyper("h", "e9", Polarity::Off, "e9");
        let errs = validate(&raw).unwrap_err();
        assert_eq!(errs.len(), 2);
        assert!(errs.iter().all(|e| matches!(
            e,
            ModelError::DanglingEdgeRef { edge, reference } if edge == "h" && reference == "e9"
        )));
    }

    #[test]
    fn unknown_init_and_endpoints() {
        let mut raw = ReactiveGraph::new("X", "A").ground("a", "A", "go", "B");
        raw.init = "Z".into();
        raw.states.remove("B");
        raw.actions.clear();
        let errs = validate(&raw).unwrap_err();
        assert!(errs.contains(&ModelError::UnknownInitState("Z".into())));
        assert!(errs.contains(&ModelError::UnknownState {
            edge: "a".into(),
            state: "B".into()
        }));
        assert!(errs.contains(&ModelError::UnknownAction {
            edge: "a".into(),
            action: "go".into()
        }));
    }

    #[test]
    fn empty_state_set() {
        let mut raw = ReactiveGraph::new("X", "A");
        raw.states.clear();
        let errs = validate(&raw).unwrap_err();
        assert_eq!(errs[0], ModelError::NoStates);
    }

    #[test]
    fn indices_follow_sorted_ids() {
        let g = validate(&fixtures::vending_machine()).unwrap();
        let names: Vec<_> = g.edges().map(|e| g.edge_name(e)).collect();
        assert_eq!(
            names,
            ["e1", "e2", "e3", "e4", "h1", "h2", "h3", "h4", "h5"]
        );
        assert_eq!(g.hyper_from(g.edge("e2").unwrap()).len(), 3);
    }
}
