//! Asynchronous, synchronous and intrusive products of two reactive graphs.
//!
//! Intrusive edges let an edge fired in one component switch edges of the
//! other on (`Γ⊕`) or off (`Γ⊖`). A side's active set after a move is
//!
//! ```text
//! (α ∪ on(e, α) ∪ Γ⊕(e)) \ (off(e, α) ∪ Γ⊖(e))
//! ```
//!
//! where the `on`/`off` terms only apply to edges fired on that side and the
//! `Γ` terms only to edges fired on the other side. In a synchronous move
//! both sides fire, so each receives its own closure effects plus the
//! intrusive effects of the other side's edge.

use std::fmt;

use thiserror::Error;

use crate::dsl::RawIntrusion;
use crate::edgeset::EdgeSet;
use crate::expansion::{explore, Lts};
use crate::model::{EdgeIx, Polarity, ValidatedGraph};
use crate::semantics::{Configuration, Move, SemanticsError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An edge of one of the two components.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SideEdge {
    pub side: Side,
    pub edge: EdgeIx,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Intrusion {
    pub source: SideEdge,
    pub target: SideEdge,
}

/// The intrusive edge sets `Γ⊕` and `Γ⊖`, sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IntrusionSpec {
    pub plus: Vec<Intrusion>,
    pub minus: Vec<Intrusion>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ProductError {
    #[error("intrusion `{side}.{edge}` refers to an unknown edge")]
    UnknownEdge { side: Side, edge: String },
    #[error(
        "intrusion `{side}.{source_edge}` -> `{side}.{target_edge}` does not cross components"
    )]
    SameSide {
        side: Side,
        source_edge: String,
        target_edge: String,
    },
    #[error("move is not enabled in the current product configuration")]
    MoveNotEnabled,
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
}

fn graph_of<'a>(
    left: &'a ValidatedGraph,
    right: &'a ValidatedGraph,
    side: Side,
) -> &'a ValidatedGraph {
    match side {
        Side::Left => left,
        Side::Right => right,
    }
}

impl IntrusionSpec {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Resolves written intrusions against the two components.
    pub fn resolve(
        raw: &[RawIntrusion],
        left: &ValidatedGraph,
        right: &ValidatedGraph,
    ) -> Result<IntrusionSpec, Vec<ProductError>> {
        let mut spec = IntrusionSpec::default();
        let mut errors = Vec::new();
        for r in raw {
            let lookup = |(side, id): &(Side, String)| {
                graph_of(left, right, *side)
                    .edge(id)
                    .map(|edge| SideEdge { side: *side, edge })
                    .ok_or(ProductError::UnknownEdge {
                        side: *side,
                        edge: id.clone(),
                    })
            };
            let (source, target) = match (lookup(&r.source), lookup(&r.target)) {
                (Ok(s), Ok(t)) => (s, t),
                (s, t) => {
                    errors.extend(s.err());
                    errors.extend(t.err());
                    continue;
                }
            };
            if source.side == target.side {
                errors.push(ProductError::SameSide {
                    side: source.side,
                    source_edge: r.source.1.clone(),
                    target_edge: r.target.1.clone(),
                });
                continue;
            }
            let pair = Intrusion { source, target };
            match r.polarity {
                Polarity::On => spec.plus.push(pair),
                Polarity::Off => spec.minus.push(pair),
            }
        }
        if !errors.is_empty() {
            return Err(errors);
        }
        spec.plus.sort();
        spec.plus.dedup();
        spec.minus.sort();
        spec.minus.dedup();
        Ok(spec)
    }

    /// Checks that every pair crosses components and names existing edges.
    pub fn check(&self, left: &ValidatedGraph, right: &ValidatedGraph) -> Result<(), ProductError> {
        for i in self.plus.iter().chain(&self.minus) {
            for e in [i.source, i.target] {
                if e.edge.0 >= graph_of(left, right, e.side).edge_count() {
                    return Err(ProductError::UnknownEdge {
                        side: e.side,
                        edge: format!("#{}", e.edge.0),
                    });
                }
            }
            if i.source.side == i.target.side {
                let g = graph_of(left, right, i.source.side);
                return Err(ProductError::SameSide {
                    side: i.source.side,
                    source_edge: g.edge_name(i.source.edge).to_string(),
                    target_edge: g.edge_name(i.target.edge).to_string(),
                });
            }
        }
        Ok(())
    }

    /// `Γ⊕(e)`: edges of `side` that `e` switches on.
    pub fn plus_image(&self, e: SideEdge, side: Side) -> EdgeSet {
        image(&self.plus, e, side)
    }

    /// `Γ⊖(e)`: edges of `side` that `e` switches off.
    pub fn minus_image(&self, e: SideEdge, side: Side) -> EdgeSet {
        image(&self.minus, e, side)
    }
}

fn image(pairs: &[Intrusion], e: SideEdge, side: Side) -> EdgeSet {
    pairs
        .iter()
        .filter(|p| p.source == e && p.target.side == side)
        .map(|p| p.target.edge)
        .collect()
}

/// How one component's active set changed in a product move.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SideChange {
    /// The edge this side fired, if it took part in the move.
    pub fired: Option<EdgeIx>,
    pub activated: EdgeSet,
    pub deactivated: EdgeSet,
    pub conflicts: EdgeSet,
}

/// Active set of `side` after the edges in `fired` were taken.
fn side_update(
    side: Side,
    alpha: &EdgeSet,
    fired: &[SideEdge],
    spec: &IntrusionSpec,
    g: &ValidatedGraph,
) -> Result<(EdgeSet, SideChange), SemanticsError> {
    let mut on = EdgeSet::new();
    let mut off = EdgeSet::new();
    let mut own = None;
    for &e in fired {
        if e.side == side {
            let (_, a, d) = g.effects(e.edge, alpha)?;
            on = on.union(&a);
            off = off.union(&d);
            own = Some(e.edge);
        }
        on = on.union(&spec.plus_image(e, side));
        off = off.union(&spec.minus_image(e, side));
    }
    let next = alpha.union(&on).difference(&off);
    let change = SideChange {
        fired: own,
        conflicts: on.intersection(&off),
        activated: on,
        deactivated: off,
    };
    Ok((next, change))
}

/// Active set of `side` after edge `e` (of either component) fires.
pub fn intrusive_effect(
    side: Side,
    alpha: &EdgeSet,
    e: SideEdge,
    spec: &IntrusionSpec,
    g: &ValidatedGraph,
) -> Result<EdgeSet, SemanticsError> {
    if let Some(m) = alpha.last() {
        if m.0 >= g.edge_count() {
            return Err(SemanticsError::InvalidConfiguration);
        }
    }
    if e.side == side && e.edge.0 >= g.edge_count() {
        return Err(SemanticsError::UnknownEdge(e.edge.0));
    }
    Ok(side_update(side, alpha, &[e], spec, g)?.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProductMode {
    Async,
    Sync,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductConfiguration {
    pub left: Configuration,
    pub right: Configuration,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProductMove {
    /// One component moves alone.
    Single { side: Side, step: Move },
    /// Both components move on a shared action.
    Joint { left: Move, right: Move },
}

pub struct ProductStep {
    pub next: ProductConfiguration,
    pub left: SideChange,
    pub right: SideChange,
}

/// Two components, their intrusive edges and the composition mode.
#[derive(Clone, Debug)]
pub struct ProductSystem {
    pub left: ValidatedGraph,
    pub right: ValidatedGraph,
    pub intrusions: IntrusionSpec,
    pub mode: ProductMode,
}

pub type ProductLts = Lts<ProductConfiguration, ProductMove>;

impl ProductSystem {
    pub fn new(
        left: ValidatedGraph,
        right: ValidatedGraph,
        intrusions: IntrusionSpec,
        mode: ProductMode,
    ) -> Result<Self, ProductError> {
        intrusions.check(&left, &right)?;
        Ok(ProductSystem {
            left,
            right,
            intrusions,
            mode,
        })
    }

    pub fn graph(&self, side: Side) -> &ValidatedGraph {
        graph_of(&self.left, &self.right, side)
    }

    pub fn initial(&self) -> ProductConfiguration {
        ProductConfiguration {
            left: self.left.initial_configuration(),
            right: self.right.initial_configuration(),
        }
    }

    /// Action name of a move.
    pub fn action_of(&self, m: &ProductMove) -> &str {
        match m {
            ProductMove::Single { side, step } => self.graph(*side).action_name(step.action),
            ProductMove::Joint { left, .. } => self.left.action_name(left.action),
        }
    }

    /// Async: every move of either side, left first. Sync: every pair of
    /// same-action moves, ordered by left edge then right edge.
    pub fn enabled(&self, pc: &ProductConfiguration) -> Vec<ProductMove> {
        let lm = self.left.enabled(&pc.left);
        let rm = self.right.enabled(&pc.right);
        match self.mode {
            ProductMode::Async => lm
                .into_iter()
                .map(|step| ProductMove::Single {
                    side: Side::Left,
                    step,
                })
                .chain(rm.into_iter().map(|step| ProductMove::Single {
                    side: Side::Right,
                    step,
                }))
                .collect(),
            ProductMode::Sync => lm
                .iter()
                .flat_map(|l| {
                    rm.iter()
                        .filter(|r| {
                            self.left.action_name(l.action) == self.right.action_name(r.action)
                        })
                        .map(|r| ProductMove::Joint {
                            left: *l,
                            right: *r,
                        })
                })
                .collect(),
        }
    }

    pub fn step(
        &self,
        pc: &ProductConfiguration,
        mv: &ProductMove,
    ) -> Result<ProductStep, ProductError> {
        if !self.enabled(pc).contains(mv) {
            return Err(ProductError::MoveNotEnabled);
        }
        let (fired, left_target, right_target) = match *mv {
            ProductMove::Single { side, step } => {
                let fired = vec![SideEdge {
                    side,
                    edge: step.edge,
                }];
                match side {
                    Side::Left => (fired, step.target, pc.right.state),
                    Side::Right => (fired, pc.left.state, step.target),
                }
            }
            ProductMove::Joint { left, right } => (
                vec![
                    SideEdge {
                        side: Side::Left,
                        edge: left.edge,
                    },
                    SideEdge {
                        side: Side::Right,
                        edge: right.edge,
                    },
                ],
                left.target,
                right.target,
            ),
        };
        let (la, lc) = side_update(
            Side::Left,
            &pc.left.active,
            &fired,
            &self.intrusions,
            &self.left,
        )?;
        let (ra, rc) = side_update(
            Side::Right,
            &pc.right.active,
            &fired,
            &self.intrusions,
            &self.right,
        )?;
        Ok(ProductStep {
            next: ProductConfiguration {
                left: Configuration::new(left_target, la),
                right: Configuration::new(right_target, ra),
            },
            left: lc,
            right: rc,
        })
    }

    pub fn expand(&self, max_states: Option<usize>) -> ProductLts {
        explore(self.initial(), max_states, |pc| {
            self.enabled(pc)
                .into_iter()
                .map(|m| {
                    let next = self.step(pc, &m).expect("enabled product moves fire").next;
                    (m, next)
                })
                .collect()
        })
    }

    /// `left: e1 (1eur)` or `e1|e5 (coin)`.
    pub fn describe_move(&self, m: &ProductMove) -> String {
        match m {
            ProductMove::Single { side, step } => {
                let g = self.graph(*side);
                format!(
                    "{side}: {} ({})",
                    g.edge_name(step.edge),
                    g.action_name(step.action)
                )
            }
            ProductMove::Joint { left, right } => format!(
                "{}|{} ({})",
                self.left.edge_name(left.edge),
                self.right.edge_name(right.edge),
                self.left.action_name(left.action)
            ),
        }
    }
}
