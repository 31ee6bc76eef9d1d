//! Verification analyses over the induced LTS: deadlocks, contradictory
//! effects, unreachable states and edges, and strong bisimulation.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::edgeset::EdgeSet;
use crate::expansion::{expand, InducedLts};
use crate::model::{ActionIx, EdgeIx, StateIx, ValidatedGraph};
use crate::products::Side;
use crate::semantics::{Configuration, SemanticsError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceStep {
    pub edge: EdgeIx,
    pub action: ActionIx,
}

/// A firing sequence from the initial configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
    pub endpoint: Configuration,
}

impl Trace {
    fn along(lts: &InducedLts, node: usize) -> Trace {
        Trace {
            steps: lts
                .path_to(node)
                .into_iter()
                .map(|t| TraceStep {
                    edge: t.label.edge,
                    action: t.label.action,
                })
                .collect(),
            endpoint: lts.nodes[node].clone(),
        }
    }

    /// Fires every step from the initial configuration and returns where it ends.
    pub fn replay(&self, g: &ValidatedGraph) -> Result<Configuration, SemanticsError> {
        let mut c = g.initial_configuration();
        for s in &self.steps {
            let effect = g.step(&c, s.edge)?;
            if effect.action != s.action {
                return Err(SemanticsError::EdgeNotEnabled(
                    g.edge_name(s.edge).to_string(),
                ));
            }
            c = effect.next;
        }
        Ok(c)
    }

    /// True if replaying the steps reproduces the recorded endpoint.
    pub fn is_valid(&self, g: &ValidatedGraph) -> bool {
        self.replay(g).is_ok_and(|c| c == self.endpoint)
    }

    /// Action labels, in order.
    pub fn actions<'g>(&self, g: &'g ValidatedGraph) -> Vec<&'g str> {
        self.steps.iter().map(|s| g.action_name(s.action)).collect()
    }

    /// `e2 (0.5eur) · e4 (get-coffee)`, or `ε` for the empty trace.
    pub fn describe(&self, g: &ValidatedGraph) -> String {
        if self.steps.is_empty() {
            return "ε".to_string();
        }
        self.steps
            .iter()
            .map(|s| format!("{} ({})", g.edge_name(s.edge), g.action_name(s.action)))
            .collect::<Vec<_>>()
            .join(" · ")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deadlock {
    pub configuration: Configuration,
    pub trace: Trace,
}

/// A reachable step that both activates and deactivates some edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conflict {
    /// Leads to the configuration the conflicting step is taken from.
    pub trace: Trace,
    pub fired: EdgeIx,
    pub conflicting: EdgeSet,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UnreachableEdges {
    /// Ground edges that label no reachable transition.
    pub never_fired: Vec<EdgeIx>,
    /// Hyper edges triggered by no reachable step.
    pub never_triggered: Vec<EdgeIx>,
}

/// A graph together with its complete expansion.
pub struct Analysis<'g> {
    graph: &'g ValidatedGraph,
    lts: InducedLts,
}

impl<'g> Analysis<'g> {
    /// Expands `graph` without a bound; the configuration space is finite.
    pub fn new(graph: &'g ValidatedGraph) -> Self {
        Analysis {
            graph,
            lts: expand(graph, None),
        }
    }

    /// Uses an existing expansion. A truncated one gives under-approximations.
    pub fn with_lts(graph: &'g ValidatedGraph, lts: InducedLts) -> Self {
        Analysis { graph, lts }
    }

    pub fn lts(&self) -> &InducedLts {
        &self.lts
    }

    pub fn deadlocks(&self) -> Vec<Deadlock> {
        let outgoing = self.lts.outgoing();
        (0..self.lts.node_count())
            .filter(|&n| outgoing[n].is_empty())
            .map(|n| Deadlock {
                configuration: self.lts.nodes[n].clone(),
                trace: Trace::along(&self.lts, n),
            })
            .collect()
    }

    pub fn conflicts(&self) -> Vec<Conflict> {
        self.lts
            .transitions
            .iter()
            .filter_map(|t| {
                let effect = self
                    .graph
                    .step(&self.lts.nodes[t.source], t.label.edge)
                    .expect("expanded transitions are enabled");
                (!effect.conflicts.is_empty()).then(|| Conflict {
                    trace: Trace::along(&self.lts, t.source),
                    fired: t.label.edge,
                    conflicting: effect.conflicts,
                })
            })
            .collect()
    }

    pub fn unreachable_states(&self) -> Vec<StateIx> {
        let seen: BTreeSet<StateIx> = self.lts.nodes.iter().map(|c| c.state).collect();
        self.graph.states().filter(|s| !seen.contains(s)).collect()
    }

    pub fn unreachable_edges(&self) -> UnreachableEdges {
        let mut fired = EdgeSet::new();
        let mut triggered = EdgeSet::new();
        for t in &self.lts.transitions {
            fired.insert(t.label.edge);
            let effect = self
                .graph
                .step(&self.lts.nodes[t.source], t.label.edge)
                .expect("expanded transitions are enabled");
            triggered = triggered.union(&effect.triggered);
        }
        let mut out = UnreachableEdges::default();
        for e in self.graph.edges() {
            if self.graph.is_hyper(e) {
                if !triggered.contains(e) {
                    out.never_triggered.push(e);
                }
            } else if !fired.contains(e) {
                out.never_fired.push(e);
            }
        }
        out
    }
}

/// Every reachable configuration without enabled edges, with a shortest trace.
pub fn find_deadlocks(g: &ValidatedGraph) -> Vec<Deadlock> {
    Analysis::new(g).deadlocks()
}

/// Every reachable step with contradictory effects.
pub fn find_conflicts(g: &ValidatedGraph) -> Vec<Conflict> {
    Analysis::new(g).conflicts()
}

/// States that occur in no reachable configuration.
pub fn unreachable_states(g: &ValidatedGraph) -> Vec<StateIx> {
    Analysis::new(g).unreachable_states()
}

pub fn unreachable_edges(g: &ValidatedGraph) -> UnreachableEdges {
    Analysis::new(g).unreachable_edges()
}

/// Why two graphs are not bisimilar.
///
/// Both traces carry the same action sequence. After replaying them, `action`
/// is available in the system named by `available_in` and not in the other.
/// At each step the attacker picked a move that the other system could only
/// answer with non-equivalent configurations, and the answer shown is the
/// one that resists longest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub left: Trace,
    pub right: Trace,
    pub action: String,
    pub available_in: Side,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BisimResult {
    /// A strong bisimulation over reachable configurations that relates the
    /// two initial configurations.
    Bisimilar {
        relation: Vec<(Configuration, Configuration)>,
    },
    NotBisimilar(Counterexample),
}

impl BisimResult {
    pub fn is_bisimilar(&self) -> bool {
        matches!(self, BisimResult::Bisimilar { .. })
    }
}

/// Disjoint union of two LTSs with actions interned by name.
struct Union {
    /// Sorted action names shared by both sides.
    actions: Vec<String>,
    /// `(action, target, transition index in its own LTS)` per node.
    succ: Vec<Vec<(usize, usize, usize)>>,
    offset: usize,
}

impl Union {
    fn new(a: &ValidatedGraph, la: &InducedLts, b: &ValidatedGraph, lb: &InducedLts) -> Self {
        let names: BTreeSet<&str> = la
            .transitions
            .iter()
            .map(|t| a.action_name(t.label.action))
            .chain(lb.transitions.iter().map(|t| b.action_name(t.label.action)))
            .collect();
        let actions: Vec<String> = names.into_iter().map(String::from).collect();
        let id = |n: &str| actions.binary_search_by(|x| x.as_str().cmp(n)).unwrap();
        let offset = la.node_count();
        let mut succ = vec![Vec::new(); offset + lb.node_count()];
        for (i, t) in la.transitions.iter().enumerate() {
            succ[t.source].push((id(a.action_name(t.label.action)), t.target, i));
        }
        for (i, t) in lb.transitions.iter().enumerate() {
            succ[offset + t.source].push((id(b.action_name(t.label.action)), offset + t.target, i));
        }
        for s in &mut succ {
            s.sort();
        }
        Union {
            actions,
            succ,
            offset,
        }
    }

    /// Signature refinement to the coarsest stable partition. Returns the
    /// partition after every round; round 0 is the trivial one.
    fn refine(&self) -> Vec<Vec<usize>> {
        let n = self.succ.len();
        let mut rounds = vec![vec![0usize; n]];
        let mut count = 1;
        loop {
            let block = rounds.last().unwrap();
            let mut ids: BTreeMap<(usize, Vec<(usize, usize)>), usize> = BTreeMap::new();
            let sigs: Vec<_> = (0..n)
                .map(|i| {
                    let mut moves: Vec<(usize, usize)> = self.succ[i]
                        .iter()
                        .map(|&(a, t, _)| (a, block[t]))
                        .collect();
                    moves.sort_unstable();
                    moves.dedup();
                    (block[i], moves)
                })
                .collect();
            for s in &sigs {
                let next = ids.len();
                ids.entry(s.clone()).or_insert(next);
            }
            let refined: Vec<usize> = sigs.iter().map(|s| ids[s]).collect();
            if ids.len() == count {
                return rounds;
            }
            count = ids.len();
            rounds.push(refined);
        }
    }
}

/// Decides strong bisimilarity of the initial configurations of `a` and `b`,
/// comparing transitions by action name.
pub fn bisimilar(a: &ValidatedGraph, b: &ValidatedGraph) -> BisimResult {
    let la = expand(a, None);
    let lb = expand(b, None);
    bisimilar_lts(a, &la, b, &lb)
}

/// As [`bisimilar`], over already expanded LTSs.
pub fn bisimilar_lts(
    a: &ValidatedGraph,
    la: &InducedLts,
    b: &ValidatedGraph,
    lb: &InducedLts,
) -> BisimResult {
    let u = Union::new(a, la, b, lb);
    let rounds = u.refine();
    let fin = rounds.last().unwrap();
    let right0 = u.offset;
    if fin[0] == fin[right0] {
        BisimResult::Bisimilar {
            relation: witness_relation(&u, fin)
                .into_iter()
                .map(|(p, q)| (la.nodes[p].clone(), lb.nodes[q - u.offset].clone()))
                .collect(),
        }
    } else {
        BisimResult::NotBisimilar(counterexample(&u, &rounds, la, lb))
    }
}

/// Pairs reachable from the initial pair by matching every move with the
/// first equivalent answer.
fn witness_relation(u: &Union, block: &[usize]) -> Vec<(usize, usize)> {
    let mut seen = BTreeSet::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::from([(0, u.offset)]);
    seen.insert((0, u.offset));
    while let Some((p, q)) = queue.pop_front() {
        order.push((p, q));
        let mut add = |pair: (usize, usize)| {
            if seen.insert(pair) {
                queue.push_back(pair);
            }
        };
        for &(a, p2, _) in &u.succ[p] {
            let &(_, q2, _) = u.succ[q]
                .iter()
                .find(|&&(b, q2, _)| b == a && block[q2] == block[p2])
                .expect("equivalent nodes match every move");
            add((p2, q2));
        }
        for &(a, q2, _) in &u.succ[q] {
            let &(_, p2, _) = u.succ[p]
                .iter()
                .find(|&&(b, p2, _)| b == a && block[p2] == block[q2])
                .expect("equivalent nodes match every move");
            add((p2, q2));
        }
    }
    order
}

fn counterexample(
    u: &Union,
    rounds: &[Vec<usize>],
    la: &InducedLts,
    lb: &InducedLts,
) -> Counterexample {
    // First round in which p and q are told apart.
    let depth = |p: usize, q: usize| rounds.iter().position(|r| r[p] != r[q]);
    let mut left_steps = Vec::new();
    let mut right_steps = Vec::new();
    let (mut p, mut q) = (0, u.offset);
    loop {
        let k = depth(p, q).expect("pair is distinguishable");
        if k == 1 {
            let acts = |n: usize| u.succ[n].iter().map(|s| s.0).collect::<BTreeSet<_>>();
            let (ap, aq) = (acts(p), acts(q));
            let act = *ap.symmetric_difference(&aq).next().unwrap();
            let available_in = if ap.contains(&act) {
                Side::Left
            } else {
                Side::Right
            };
            let trace = |lts: &InducedLts, steps: Vec<usize>, node: usize| Trace {
                steps: steps
                    .into_iter()
                    .map(|t| TraceStep {
                        edge: lts.transitions[t].label.edge,
                        action: lts.transitions[t].label.action,
                    })
                    .collect(),
                endpoint: lts.nodes[node].clone(),
            };
            return Counterexample {
                left: trace(la, left_steps, p),
                right: trace(lb, right_steps, q - u.offset),
                action: u.actions[act].clone(),
                available_in,
            };
        }
        let prev = &rounds[k - 1];
        // Attacker: first move, by action then side, that every answer fails
        // to match at the previous round.
        let attack = |from: usize, other: usize| {
            u.succ[from].iter().find(|&&(act, t, _)| {
                u.succ[other]
                    .iter()
                    .filter(|s| s.0 == act)
                    .all(|&(_, t2, _)| prev[t] != prev[t2])
            })
        };
        let mut moves: Vec<(usize, Side, (usize, usize, usize))> = Vec::new();
        if let Some(m) = attack(p, q) {
            moves.push((m.0, Side::Left, *m));
        }
        if let Some(m) = attack(q, p) {
            moves.push((m.0, Side::Right, *m));
        }
        moves.sort_by_key(|m| (m.0, m.1 == Side::Right));
        let (act, side, (_, t, ti)) = moves[0];
        let (defender, attacked_left) = match side {
            Side::Left => (q, true),
            Side::Right => (p, false),
        };
        // Defender: the answer distinguished latest.
        let &(_, t2, ti2) = u.succ[defender]
            .iter()
            .filter(|s| s.0 == act)
            .min_by_key(|&&(_, t2, _)| {
                let d = if attacked_left {
                    depth(t, t2)
                } else {
                    depth(t2, t)
                };
                std::cmp::Reverse(d.unwrap_or(usize::MAX))
            })
            .expect("actions agree beyond the first round");
        if attacked_left {
            left_steps.push(ti);
            right_steps.push(ti2);
            (p, q) = (t, t2);
        } else {
            right_steps.push(ti);
            left_steps.push(ti2);
            (p, q) = (t2, t);
        }
    }
}

/// Checks the transfer property of `relation` directly against the step
/// semantics of both graphs, and that it relates the initial configurations.
pub fn is_bisimulation(
    a: &ValidatedGraph,
    b: &ValidatedGraph,
    relation: &[(Configuration, Configuration)],
) -> bool {
    let rel: BTreeSet<&(Configuration, Configuration)> = relation.iter().collect();
    let init = (a.initial_configuration(), b.initial_configuration());
    if !rel.contains(&init) {
        return false;
    }
    let moves = |g: &ValidatedGraph, c: &Configuration| -> Vec<(String, Configuration)> {
        g.enabled(c)
            .into_iter()
            .map(|m| {
                (
                    g.action_name(m.action).to_string(),
                    g.step(c, m.edge).unwrap().next,
                )
            })
            .collect()
    };
    let mut cache: HashMap<(bool, Configuration), Vec<(String, Configuration)>> = HashMap::new();
    let mut succ = |left: bool, c: &Configuration| {
        cache
            .entry((left, c.clone()))
            .or_insert_with(|| if left { moves(a, c) } else { moves(b, c) })
            .clone()
    };
    relation.iter().all(|(p, q)| {
        let sp = succ(true, p);
        let sq = succ(false, q);
        sp.iter().all(|(act, p2)| {
            sq.iter()
                .any(|(act2, q2)| act == act2 && rel.contains(&(p2.clone(), q2.clone())))
        }) && sq.iter().all(|(act, q2)| {
            sp.iter()
                .any(|(act2, p2)| act == act2 && rel.contains(&(p2.clone(), q2.clone())))
        })
    })
}
