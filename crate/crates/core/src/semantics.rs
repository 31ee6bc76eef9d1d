//! Activation closure and single-step semantics.
//!
//! Firing an active ground edge `e` from configuration `<w, α>` moves to the
//! edge's target and updates the active set to `(α ∪ on(e, α)) \ off(e, α)`,
//! where `on`/`off` collect the targets of the activating/deactivating hyper
//! edges reachable from `e` through active hyper edges. Effects are collected
//! atomically before being applied; deactivation wins on overlap.

use thiserror::Error;

use crate::edgeset::EdgeSet;
use crate::model::{ActionIx, Detail, EdgeIx, Polarity, StateIx, ValidatedGraph};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SemanticsError {
    #[error("unknown edge index {0}")]
    UnknownEdge(usize),
    #[error("edge `{0}` is not enabled in the current configuration")]
    EdgeNotEnabled(String),
    #[error("configuration does not belong to this graph")]
    InvalidConfiguration,
    #[error("closure recursion exceeded its depth bound of {0}")]
    FuelExhausted(usize),
}

/// Semantic state: current state plus the set of active edges.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub state: StateIx,
    pub active: EdgeSet,
}

impl Configuration {
    pub fn new(state: StateIx, active: EdgeSet) -> Self {
        Configuration { state, active }
    }
}

/// An enabled ground edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Move {
    pub edge: EdgeIx,
    pub action: ActionIx,
    pub target: StateIx,
}

/// Everything a single step changed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepEffect {
    pub fired: EdgeIx,
    pub action: ActionIx,
    /// Hyper edges triggered by the step (the closure from the fired edge).
    pub triggered: EdgeSet,
    pub activated: EdgeSet,
    pub deactivated: EdgeSet,
    /// Edges both activated and deactivated; they end up inactive.
    pub conflicts: EdgeSet,
    pub next: Configuration,
}

impl ValidatedGraph {
    pub fn initial_configuration(&self) -> Configuration {
        Configuration::new(self.init(), self.initial_active().clone())
    }

    fn check_edge(&self, e: EdgeIx) -> Result<(), SemanticsError> {
        if e.0 < self.edge_count() {
            Ok(())
        } else {
            Err(SemanticsError::UnknownEdge(e.0))
        }
    }

    fn check_set(&self, alpha: &EdgeSet) -> Result<(), SemanticsError> {
        match alpha.last() {
            Some(m) => self.check_edge(m),
            None => Ok(()),
        }
    }

    /// Hyper edges whose source is `e`.
    pub fn from(&self, e: EdgeIx) -> Result<EdgeSet, SemanticsError> {
        self.check_edge(e)?;
        Ok(self.hyper_from(e).iter().copied().collect())
    }

    /// Active hyper edges triggered, transitively, by `e`.
    ///
    /// Follows the recursion literally: every active hyper edge `r` leaving `e`
    /// is included, and the search continues from `r` with `e` (the parent,
    /// not `r`) removed from the active set.
    pub fn from_star(&self, e: EdgeIx, alpha: &EdgeSet) -> Result<EdgeSet, SemanticsError> {
        self.check_edge(e)?;
        self.check_set(alpha)?;
        let fuel = alpha.len();
        let mut out = EdgeSet::new();
        self.collect_triggered(e, alpha, 0, fuel, &mut out)?;
        Ok(out)
    }

    fn collect_triggered(
        &self,
        e: EdgeIx,
        alpha: &EdgeSet,
        depth: usize,
        fuel: usize,
        out: &mut EdgeSet,
    ) -> Result<(), SemanticsError> {
        let children: Vec<EdgeIx> = self
            .hyper_from(e)
            .iter()
            .copied()
            .filter(|r| alpha.contains(*r))
            .collect();
        if children.is_empty() {
            return Ok(());
        }
        if depth >= fuel {
            return Err(SemanticsError::FuelExhausted(fuel));
        }
        let mut rest = alpha.clone();
        rest.remove(e);
        for r in children {
            out.insert(r);
            self.collect_triggered(r, &rest, depth + 1, fuel, out)?;
        }
        Ok(())
    }

    fn targets_with(&self, triggered: &EdgeSet, polarity: Polarity) -> EdgeSet {
        triggered
            .iter()
            .filter_map(|h| match self.detail(h) {
                Some(Detail::Hyper {
                    target,
                    polarity: p,
                    ..
                }) if p == polarity => Some(target),
                _ => None,
            })
            .collect()
    }

    /// Edges activated by firing `e` under `alpha`.
    pub fn on_set(&self, e: EdgeIx, alpha: &EdgeSet) -> Result<EdgeSet, SemanticsError> {
        Ok(self.targets_with(&self.from_star(e, alpha)?, Polarity::On))
    }

    /// Edges deactivated by firing `e` under `alpha`.
    pub fn off_set(&self, e: EdgeIx, alpha: &EdgeSet) -> Result<EdgeSet, SemanticsError> {
        Ok(self.targets_with(&self.from_star(e, alpha)?, Polarity::Off))
    }

    /// Both effect sets from a single closure computation: `(triggered, on, off)`.
    pub fn effects(
        &self,
        e: EdgeIx,
        alpha: &EdgeSet,
    ) -> Result<(EdgeSet, EdgeSet, EdgeSet), SemanticsError> {
        let triggered = self.from_star(e, alpha)?;
        let on = self.targets_with(&triggered, Polarity::On);
        let off = self.targets_with(&triggered, Polarity::Off);
        Ok((triggered, on, off))
    }

    /// Active ground edges leaving the current state, in edge-id order.
    pub fn enabled(&self, c: &Configuration) -> Vec<Move> {
        if c.state.0 >= self.state_count() {
            return Vec::new();
        }
        self.ground_from(c.state)
            .iter()
            .filter(|e| c.active.contains(**e))
            .filter_map(|&edge| match self.detail(edge) {
                Some(Detail::Ground { action, target, .. }) => Some(Move {
                    edge,
                    action,
                    target,
                }),
                _ => None,
            })
            .collect()
    }

    /// Fires ground edge `e` from `c`.
    pub fn step(&self, c: &Configuration, e: EdgeIx) -> Result<StepEffect, SemanticsError> {
        if c.state.0 >= self.state_count() {
            return Err(SemanticsError::InvalidConfiguration);
        }
        self.check_set(&c.active)
            .map_err(|_| SemanticsError::InvalidConfiguration)?;
        self.check_edge(e)?;
        let (action, target) = match self.detail(e) {
            Some(Detail::Ground {
                source,
                action,
                target,
            }) if source == c.state && c.active.contains(e) => (action, target),
            _ => {
                return Err(SemanticsError::EdgeNotEnabled(
                    self.edge_name(e).to_string(),
                ))
            }
        };
        let (triggered, activated, deactivated) = self.effects(e, &c.active)?;
        let conflicts = activated.intersection(&deactivated);
        let active = c.active.union(&activated).difference(&deactivated);
        Ok(StepEffect {
            fired: e,
            action,
            triggered,
            activated,
            deactivated,
            conflicts,
            next: Configuration::new(target, active),
        })
    }

    /// Human-readable `State {e1, e2}` rendering of a configuration.
    pub fn describe(&self, c: &Configuration) -> String {
        format!(
            "{} {{{}}}",
            self.state_name(c.state),
            self.edge_set_names(&c.active).join(", ")
        )
    }
}
