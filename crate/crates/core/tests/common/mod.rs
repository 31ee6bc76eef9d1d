//! Random model generators and brute-force oracles shared by the test targets.
//!
//! The oracles work directly on the string-keyed [`ReactiveGraph`] with
//! ordered sets of names, and share no code with the library's semantics.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::TestRunner;
use rgraph::{validate, Configuration, EdgeDetail, Polarity, ReactiveGraph, ValidatedGraph};

const ACTIONS: &[&str] = &["a", "b", "c", "go now", "x-y"];
const EDGE_NAMES: &[&str] = &["m", "c", "x9", "a_1", "q", "f-f", "k", "b", "z", "d"];

#[derive(Clone, Debug)]
enum EdgeSpec {
    Ground(usize, usize, usize),
    Hyper(usize, usize, bool),
}

fn build(states: usize, specs: Vec<EdgeSpec>, active: Vec<bool>, init: usize) -> ReactiveGraph {
    let state = |i: usize| format!("s{i}");
    let mut g = ReactiveGraph::new("R", state(init));
    for i in 0..states {
        g = g.state(&state(i));
    }
    let m = specs.len();
    let mut seen = BTreeSet::new();
    for (i, spec) in specs.into_iter().enumerate() {
        let mut detail = match spec {
            EdgeSpec::Ground(s, a, t) => EdgeDetail::Ground {
                source: state(s),
                action: ACTIONS[a].to_string(),
                target: state(t),
            },
            EdgeSpec::Hyper(s, t, on) => EdgeDetail::Hyper {
                source: EDGE_NAMES[s % m].to_string(),
                target: EDGE_NAMES[t % m].to_string(),
                polarity: if on { Polarity::On } else { Polarity::Off },
            },
        };
        if !seen.insert(detail.clone()) {
            detail = EdgeDetail::Ground {
                source: state(0),
                action: format!("d{i}"),
                target: state(0),
            };
        }
        if let EdgeDetail::Ground { action, .. } = &detail {
            g.actions.insert(action.clone());
        }
        g.edges.insert(EDGE_NAMES[i].to_string(), detail);
        if active[i] {
            g.active.insert(EDGE_NAMES[i].to_string());
        }
    }
    g
}

/// Well-formed raw graphs with up to `max_states` states and `max_edges` edges.
pub fn arb_raw(max_states: usize, max_edges: usize) -> impl Strategy<Value = ReactiveGraph> {
    assert!(max_edges <= EDGE_NAMES.len());
    (1..=max_states, prop_oneof![1 => 0..=max_edges, 3 => max_edges / 2..=max_edges])
        .prop_flat_map(|(n, m)| {
            let edge = prop_oneof![
                5 => (0..n, 0..ACTIONS.len(), 0..n).prop_map(|(s, a, t)| EdgeSpec::Ground(s, a, t)),
                2 => (0..m.max(1), 0..m.max(1), any::<bool>()).prop_map(|(s, t, on)| EdgeSpec::Hyper(s, t, on)),
            ];
            (
                Just(n),
                proptest::collection::vec(edge, m),
                proptest::collection::vec(prop::bool::weighted(0.8), m),
                0..n,
            )
        })
        .prop_map(|(n, specs, active, init)| build(n, specs, active, init))
}

pub fn arb_graph(max_states: usize, max_edges: usize) -> impl Strategy<Value = ValidatedGraph> {
    arb_raw(max_states, max_edges)
        .prop_map(|g| validate(&g).expect("generator builds valid graphs"))
}

/// `count` deterministic samples of a strategy.
pub fn samples<S: Strategy>(strategy: S, count: usize) -> Vec<S::Value> {
    let mut runner = TestRunner::deterministic();
    (0..count)
        .map(|_| {
            strategy
                .new_tree(&mut runner)
                .expect("strategy samples")
                .current()
        })
        .collect()
}

/// The part of `g` the textual notation can express: states and actions
/// that occur in no edge are dropped, except the initial state.
pub fn expressible(g: &ReactiveGraph) -> ReactiveGraph {
    let mut out = g.clone();
    out.states = BTreeSet::from([g.init.clone()]);
    out.actions.clear();
    for d in g.edges.values() {
        if let EdgeDetail::Ground {
            source,
            action,
            target,
        } = d
        {
            out.states.insert(source.clone());
            out.states.insert(target.clone());
            out.actions.insert(action.clone());
        }
    }
    out
}

/// A configuration by name: current state and active edge ids.
pub type NamedConf = (String, BTreeSet<String>);

pub fn named(g: &ValidatedGraph, c: &Configuration) -> NamedConf {
    (
        g.state_name(c.state).to_string(),
        g.edge_set_names(&c.active)
            .into_iter()
            .map(str::to_string)
            .collect(),
    )
}

/// Direct evaluator of the step rule on the raw tuple.
pub struct Oracle<'a> {
    pub g: &'a ReactiveGraph,
}

/// `(edge, action, target state)` of an enabled ground edge.
pub type NamedMove = (String, String, String);

impl<'a> Oracle<'a> {
    pub fn new(g: &'a ReactiveGraph) -> Self {
        Oracle { g }
    }

    pub fn initial(&self) -> NamedConf {
        (self.g.init.clone(), self.g.active.clone())
    }

    fn from(&self, e: &str) -> BTreeSet<String> {
        self.g
            .edges
            .iter()
            .filter(|(_, d)| matches!(d, EdgeDetail::Hyper { source, .. } if source == e))
            .map(|(id, _)| id.clone())
            .collect()
    }

    /// The union over active `r` leaving `e` of `{r} ∪ from*(r, α \ {e})`.
    pub fn star(&self, e: &str, alpha: &BTreeSet<String>) -> BTreeSet<String> {
        let mut without: BTreeSet<String> = alpha.clone();
        without.remove(e);
        let mut out = BTreeSet::new();
        for r in self.from(e).intersection(alpha) {
            out.insert(r.clone());
            out.extend(self.star(r, &without));
        }
        out
    }

    fn targets(&self, e: &str, alpha: &BTreeSet<String>, want: Polarity) -> BTreeSet<String> {
        self.star(e, alpha)
            .iter()
            .filter_map(|h| match &self.g.edges[h] {
                EdgeDetail::Hyper {
                    target, polarity, ..
                } if *polarity == want => Some(target.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn on(&self, e: &str, alpha: &BTreeSet<String>) -> BTreeSet<String> {
        self.targets(e, alpha, Polarity::On)
    }

    pub fn off(&self, e: &str, alpha: &BTreeSet<String>) -> BTreeSet<String> {
        self.targets(e, alpha, Polarity::Off)
    }

    pub fn enabled(&self, c: &NamedConf) -> Vec<NamedMove> {
        self.g
            .edges
            .iter()
            .filter_map(|(id, d)| match d {
                EdgeDetail::Ground {
                    source,
                    action,
                    target,
                } if *source == c.0 && c.1.contains(id) => {
                    Some((id.clone(), action.clone(), target.clone()))
                }
                _ => None,
            })
            .collect()
    }

    /// Applies the effects of firing `e`; `e` is assumed enabled.
    pub fn step(&self, c: &NamedConf, e: &str) -> NamedConf {
        let EdgeDetail::Ground { target, .. } = &self.g.edges[e] else {
            panic!("{e} is not a ground edge");
        };
        let on = self.on(e, &c.1);
        let off = self.off(e, &c.1);
        let next =
            c.1.union(&on)
                .filter(|x| !off.contains(*x))
                .cloned()
                .collect();
        (target.clone(), next)
    }

    /// Reachable configurations and `(source, edge, target)` transitions.
    pub fn reachable(
        &self,
    ) -> (
        BTreeSet<NamedConf>,
        BTreeSet<(NamedConf, String, NamedConf)>,
    ) {
        let mut seen = BTreeSet::from([self.initial()]);
        let mut edges = BTreeSet::new();
        let mut queue = VecDeque::from([self.initial()]);
        while let Some(c) = queue.pop_front() {
            for (e, _, _) in self.enabled(&c) {
                let n = self.step(&c, &e);
                if seen.insert(n.clone()) {
                    queue.push_back(n.clone());
                }
                edges.insert((c.clone(), e, n));
            }
        }
        (seen, edges)
    }

    pub fn deadlocks(&self) -> BTreeSet<NamedConf> {
        self.reachable()
            .0
            .into_iter()
            .filter(|c| self.enabled(c).is_empty())
            .collect()
    }

    fn action_of(&self, e: &str) -> String {
        match &self.g.edges[e] {
            EdgeDetail::Ground { action, .. } => action.clone(),
            _ => unreachable!(),
        }
    }

    /// Reachable configurations mapped to their `(action, successor)` moves.
    pub fn action_graph(&self) -> BTreeMap<NamedConf, BTreeSet<(String, NamedConf)>> {
        let (nodes, edges) = self.reachable();
        let mut out: BTreeMap<_, BTreeSet<_>> =
            nodes.into_iter().map(|c| (c, BTreeSet::new())).collect();
        for (s, e, t) in edges {
            out.get_mut(&s).unwrap().insert((self.action_of(&e), t));
        }
        out
    }
}

type ActionGraph = BTreeMap<NamedConf, BTreeSet<(String, NamedConf)>>;

/// Greatest strong bisimulation between the reachable parts of two graphs,
/// by naive fixpoint iteration over all cross pairs.
pub fn naive_bisimulation(
    a: &ReactiveGraph,
    b: &ReactiveGraph,
) -> BTreeSet<(NamedConf, NamedConf)> {
    let ga = Oracle::new(a).action_graph();
    let gb = Oracle::new(b).action_graph();
    let mut rel: BTreeSet<(NamedConf, NamedConf)> = ga
        .keys()
        .flat_map(|p| gb.keys().map(move |q| (p.clone(), q.clone())))
        .collect();
    let matched = |rel: &BTreeSet<(NamedConf, NamedConf)>,
                   p: &NamedConf,
                   q: &NamedConf,
                   ga: &ActionGraph,
                   gb: &ActionGraph,
                   flip: bool| {
        ga[p].iter().all(|(act, p2)| {
            gb[q].iter().any(|(act2, q2)| {
                act == act2
                    && if flip {
                        rel.contains(&(q2.clone(), p2.clone()))
                    } else {
                        rel.contains(&(p2.clone(), q2.clone()))
                    }
            })
        })
    };
    loop {
        let next: BTreeSet<_> = rel
            .iter()
            .filter(|(p, q)| {
                matched(&rel, p, q, &ga, &gb, false) && matched(&rel, q, p, &gb, &ga, true)
            })
            .cloned()
            .collect();
        if next.len() == rel.len() {
            return rel;
        }
        rel = next;
    }
}

pub fn naive_bisimilar(a: &ReactiveGraph, b: &ReactiveGraph) -> bool {
    naive_bisimulation(a, b).contains(&(Oracle::new(a).initial(), Oracle::new(b).initial()))
}

pub type NamedPair = (NamedConf, NamedConf);

/// Interleaving of two graphs that do not influence each other. Labels are
/// `left:EDGE` or `right:EDGE`.
pub fn shuffle_oracle(
    a: &ReactiveGraph,
    b: &ReactiveGraph,
) -> (
    BTreeSet<NamedPair>,
    BTreeSet<(NamedPair, String, NamedPair)>,
) {
    let (oa, ob) = (Oracle::new(a), Oracle::new(b));
    pair_closure((oa.initial(), ob.initial()), |(p, q)| {
        let mut out = Vec::new();
        for (e, _, _) in oa.enabled(p) {
            out.push((format!("left:{e}"), (oa.step(p, &e), q.clone())));
        }
        for (e, _, _) in ob.enabled(q) {
            out.push((format!("right:{e}"), (p.clone(), ob.step(q, &e))));
        }
        out
    })
}

/// Lock-step composition on equal action names. Labels are `EDGE|EDGE`.
pub fn sync_oracle(
    a: &ReactiveGraph,
    b: &ReactiveGraph,
) -> (
    BTreeSet<NamedPair>,
    BTreeSet<(NamedPair, String, NamedPair)>,
) {
    let (oa, ob) = (Oracle::new(a), Oracle::new(b));
    pair_closure((oa.initial(), ob.initial()), |(p, q)| {
        let mut out = Vec::new();
        for (e, act, _) in oa.enabled(p) {
            for (f, act2, _) in ob.enabled(q) {
                if act == act2 {
                    out.push((format!("{e}|{f}"), (oa.step(p, &e), ob.step(q, &f))));
                }
            }
        }
        out
    })
}

pub fn pair_closure(
    init: NamedPair,
    succ: impl Fn(&NamedPair) -> Vec<(String, NamedPair)>,
) -> (
    BTreeSet<NamedPair>,
    BTreeSet<(NamedPair, String, NamedPair)>,
) {
    let mut seen = BTreeSet::from([init.clone()]);
    let mut edges = BTreeSet::new();
    let mut queue = VecDeque::from([init]);
    while let Some(c) = queue.pop_front() {
        for (label, n) in succ(&c) {
            if seen.insert(n.clone()) {
                queue.push_back(n.clone());
            }
            edges.insert((c.clone(), label, n));
        }
    }
    (seen, edges)
}

/// Checks a named relation against the oracle's step function directly.
pub fn oracle_transfer(
    a: &ReactiveGraph,
    b: &ReactiveGraph,
    rel: &BTreeSet<(NamedConf, NamedConf)>,
) -> bool {
    let (oa, ob) = (Oracle::new(a), Oracle::new(b));
    let moves = |o: &Oracle, c: &NamedConf| -> Vec<(String, NamedConf)> {
        o.enabled(c)
            .into_iter()
            .map(|(e, act, _)| (act, o.step(c, &e)))
            .collect()
    };
    rel.contains(&(oa.initial(), ob.initial()))
        && rel.iter().all(|(p, q)| {
            let (mp, mq) = (moves(&oa, p), moves(&ob, q));
            mp.iter().all(|(x, p2)| {
                mq.iter()
                    .any(|(y, q2)| x == y && rel.contains(&(p2.clone(), q2.clone())))
            }) && mq.iter().all(|(y, q2)| {
                mp.iter()
                    .any(|(x, p2)| x == y && rel.contains(&(p2.clone(), q2.clone())))
            })
        })
}

/// The induced LTS of `g` written back as a graph without hyper edges.
/// Configurations become states `n0, n1, ..`; it is always bisimilar to `g`.
pub fn transcribe(g: &ValidatedGraph) -> ReactiveGraph {
    let lts = rgraph::expand(g, None);
    let mut out = ReactiveGraph::new(format!("{}Lts", g.name()), "n0");
    for i in 0..lts.node_count() {
        out = out.state(&format!("n{i}"));
    }
    for (j, t) in lts.transitions.iter().enumerate() {
        out = out.ground(
            &format!("t{j}"),
            &format!("n{}", t.source),
            g.action_name(t.label.action),
            &format!("n{}", t.target),
        );
    }
    out
}
