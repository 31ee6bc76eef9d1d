//! Breadth-first expansion of a steppable semantics into an explicit LTS.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use crate::model::{ActionIx, EdgeIx, ValidatedGraph};
use crate::semantics::Configuration;

/// Bound used by user-facing entry points.
pub const DEFAULT_MAX_STATES: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition<L> {
    pub source: usize,
    pub label: L,
    pub target: usize,
}

/// Explicit transition system over nodes of type `C` with labels `L`.
///
/// Nodes are numbered in discovery order; node 0 is initial. Transitions are
/// listed in the order they were generated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lts<C, L> {
    pub nodes: Vec<C>,
    pub transitions: Vec<Transition<L>>,
    pub truncated: bool,
    /// For every non-initial node, the transition that discovered it.
    /// Following these back to node 0 gives a shortest path.
    pub parents: Vec<Option<usize>>,
}

/// Label of a single-graph transition: the action and its witness edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StepLabel {
    pub action: ActionIx,
    pub edge: EdgeIx,
}

/// LTS induced by a reactive graph.
pub type InducedLts = Lts<Configuration, StepLabel>;

impl<C, L> Lts<C, L> {
    pub const INITIAL: usize = 0;

    pub fn initial(&self) -> &C {
        &self.nodes[0]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.len()
    }

    /// Indices into `transitions` leaving each node.
    pub fn outgoing(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for (i, t) in self.transitions.iter().enumerate() {
            out[t.source].push(i);
        }
        out
    }

    /// Transitions from the initial node to `node` along the BFS tree.
    pub fn path_to(&self, node: usize) -> Vec<&Transition<L>> {
        let mut path = Vec::new();
        let mut at = node;
        while let Some(t) = self.parents[at] {
            path.push(&self.transitions[t]);
            at = self.transitions[t].source;
        }
        path.reverse();
        path
    }
}

/// Generic breadth-first closure.
///
/// `successors` must list moves in canonical order; the result is then fully
/// deterministic. With `max_states = Some(n)` at most `n` nodes are kept and
/// any transition that would need an extra node is dropped, marking the
/// result as truncated.
pub fn explore<C, L, F>(initial: C, max_states: Option<usize>, mut successors: F) -> Lts<C, L>
where
    C: Clone + Eq + Hash,
    F: FnMut(&C) -> Vec<(L, C)>,
{
    let limit = max_states.unwrap_or(usize::MAX).max(1);
    let mut index: HashMap<C, usize> = HashMap::new();
    index.insert(initial.clone(), 0);
    let mut lts = Lts {
        nodes: vec![initial],
        transitions: Vec::new(),
        truncated: false,
        parents: vec![None],
    };
    let mut next = 0;
    while next < lts.nodes.len() {
        let current = lts.nodes[next].clone();
        for (label, succ) in successors(&current) {
            let target = match index.get(&succ) {
                Some(&t) => t,
                None if lts.nodes.len() >= limit => {
                    lts.truncated = true;
                    continue;
                }
                None => {
                    let t = lts.nodes.len();
                    index.insert(succ.clone(), t);
                    lts.nodes.push(succ);
                    lts.parents.push(Some(lts.transitions.len()));
                    t
                }
            };
            lts.transitions.push(Transition {
                source: next,
                label,
                target,
            });
        }
        next += 1;
    }
    lts
}

/// Expands `g` from its initial configuration.
pub fn expand(g: &ValidatedGraph, max_states: Option<usize>) -> InducedLts {
    explore(g.initial_configuration(), max_states, |c| {
        g.enabled(c)
            .into_iter()
            .map(|m| {
                let effect = g
                    .step(c, m.edge)
                    .expect("enabled moves can always be fired");
                (
                    StepLabel {
                        action: m.action,
                        edge: m.edge,
                    },
                    effect.next,
                )
            })
            .collect()
    })
}

/// Size of a graph next to the size of its LTS.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeStats {
    pub rg_states: usize,
    pub rg_ground_edges: usize,
    pub rg_hyper_edges: usize,
    pub lts_states: usize,
    pub lts_edges: usize,
}

impl SizeStats {
    /// LTS states per graph state.
    pub fn state_ratio(&self) -> f64 {
        self.lts_states as f64 / self.rg_states as f64
    }

    /// LTS transitions per graph edge (ground and hyper).
    pub fn edge_ratio(&self) -> f64 {
        self.lts_edges as f64 / (self.rg_ground_edges + self.rg_hyper_edges) as f64
    }
}

impl fmt::Display for SizeStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "RG: {} states, {} ground, {} hyper; LTS: {} states, {} edges",
            self.rg_states,
            self.rg_ground_edges,
            self.rg_hyper_edges,
            self.lts_states,
            self.lts_edges
        )
    }
}

pub fn stats<C, L>(g: &ValidatedGraph, lts: &Lts<C, L>) -> SizeStats {
    SizeStats {
        rg_states: g.state_count(),
        rg_ground_edges: g.ground_count(),
        rg_hyper_edges: g.hyper_count(),
        lts_states: lts.node_count(),
        lts_edges: lts.transition_count(),
    }
}
