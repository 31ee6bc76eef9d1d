//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails. Tolerances and time limits are pinned below.

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rgraph::analysis::{bisimilar, find_conflicts, find_deadlocks, is_bisimulation, BisimResult};
use rgraph::dsl::{parse, parse_model, pretty};
use rgraph::export::{from_json, to_json};
use rgraph::products::{IntrusionSpec, ProductMode, ProductMove, ProductSystem, Side};
use rgraph::{
    expand, fixtures, stats, validate, Configuration, EdgeSet, SemanticsError, ValidatedGraph,
};

mod common;
use common::{naive_bisimulation, named, samples, shuffle_oracle, sync_oracle, NamedConf, Oracle};

const FAST: Duration = Duration::from_secs(1);
const SLOW: Duration = Duration::from_secs(30);
const STATE_RATIO: f64 = 7.3;
const EDGE_RATIO: f64 = 4.6;
const RATIO_TOLERANCE: f64 = 0.05;
const PRODUCT_PAIRS: usize = 100;
const STEP_GRAPHS: usize = 500;
const INVARIANT_GRAPHS: usize = 500;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn vm() -> ValidatedGraph {
    parse_model(fixtures::VENDING).unwrap()
}

fn fts() -> ValidatedGraph {
    parse_model(fixtures::FTS).unwrap()
}

fn vm_expansion() -> Check {
    let g = vm();
    let lts = expand(&g, None);
    ensure(
        (lts.node_count(), lts.transition_count(), lts.truncated) == (7, 6, false),
        || {
            format!(
                "got {} states, {} transitions",
                lts.node_count(),
                lts.transition_count()
            )
        },
    )?;
    let (nodes, edges) = Oracle::new(g.model()).reachable();
    ensure((nodes.len(), edges.len()) == (7, 6), || {
        "oracle disagrees".into()
    })?;
    Ok("7 states, 6 transitions".into())
}

fn closure_example() -> Check {
    let g = vm();
    let e1 = g.edge("e1").unwrap();
    let off = g.off_set(e1, &g.all_edges()).map_err(|e| e.to_string())?;
    let names: Vec<&str> = g.edge_set_names(&off);
    ensure(names == ["e1", "e2"], || format!("off(e1, E) = {names:?}"))?;
    let all: BTreeSet<String> = g.model().edges.keys().cloned().collect();
    let oracle = Oracle::new(g.model()).off("e1", &all);
    ensure(oracle == BTreeSet::from(["e1".into(), "e2".into()]), || {
        format!("oracle gives {oracle:?}")
    })?;
    Ok("off(e1, E) = {e1, e2}".into())
}

fn fts_stats() -> Check {
    let g = fts();
    let s = stats(&g, &expand(&g, None));
    ensure(
        (
            s.rg_states,
            s.rg_ground_edges,
            s.rg_hyper_edges,
            s.lts_states,
            s.lts_edges,
        ) == (7, 14, 8, 51, 101),
        || s.to_string(),
    )?;
    let (sr, er) = (s.state_ratio(), s.edge_ratio());
    ensure(
        (sr - STATE_RATIO).abs() <= RATIO_TOLERANCE && (er - EDGE_RATIO).abs() <= RATIO_TOLERANCE,
        || format!("ratios {sr:.3} / {er:.3}"),
    )?;
    Ok(format!("{s}; ratios {sr:.2}x states, {er:.2}x edges"))
}

fn fts_analyses() -> Check {
    let g = fts();
    let (d, c) = (find_deadlocks(&g), find_conflicts(&g));
    ensure(d.is_empty() && c.is_empty(), || {
        format!("{} deadlocks, {} conflicts", d.len(), c.len())
    })?;
    ensure(Oracle::new(g.model()).deadlocks().is_empty(), || {
        "oracle finds deadlocks".into()
    })?;
    Ok("0 deadlocks, 0 conflicts".into())
}

fn vm_deadlocks() -> Check {
    let g = vm();
    let found = find_deadlocks(&g);
    ensure(found.len() == 2, || format!("{} deadlocks", found.len()))?;
    for d in &found {
        ensure(d.trace.is_valid(&g), || {
            format!("trace {} does not replay", d.trace.describe(&g))
        })?;
        ensure(g.enabled(&d.trace.replay(&g).unwrap()).is_empty(), || {
            "endpoint not dead".into()
        })?;
    }
    let ours: BTreeSet<NamedConf> = found.iter().map(|d| named(&g, &d.configuration)).collect();
    ensure(ours == Oracle::new(g.model()).deadlocks(), || {
        "deadlock set differs from oracle".into()
    })?;
    Ok(found
        .iter()
        .map(|d| d.trace.describe(&g))
        .collect::<Vec<_>>()
        .join(" | "))
}

fn bisimulation() -> Check {
    let started = Instant::now();
    let input = parse(fixtures::VENDING_BISIM).unwrap();
    let (a, b) = (&input.primary, input.comparand.as_ref().unwrap());
    let BisimResult::Bisimilar { relation } = bisimilar(a, b) else {
        return Err("VM and its LTS transcription reported not bisimilar".into());
    };
    ensure(is_bisimulation(a, b, &relation), || {
        "relation fails the transfer check".into()
    })?;
    let named_rel: BTreeSet<_> = relation
        .iter()
        .map(|(p, q)| (named(a, p), named(b, q)))
        .collect();
    ensure(
        common::oracle_transfer(a.model(), b.model(), &named_rel),
        || "relation fails the oracle transfer check".into(),
    )?;
    ensure(common::naive_bisimilar(a.model(), b.model()), || {
        "naive fixpoint disagrees".into()
    })?;
    let first = started.elapsed();
    ensure(first < FAST, || format!("bisimilar case took {first:?}"))?;

    let started = Instant::now();
    let input = parse(fixtures::VENDING_NO_H5).unwrap();
    let (a, b) = (&input.primary, input.comparand.as_ref().unwrap());
    let BisimResult::NotBisimilar(cx) = bisimilar(a, b) else {
        return Err("VM and VM without h5 reported bisimilar".into());
    };
    ensure(cx.left.is_valid(a) && cx.right.is_valid(b), || {
        "counterexample does not replay".into()
    })?;
    ensure(cx.left.actions(a) == cx.right.actions(b), || {
        "counterexample traces differ in actions".into()
    })?;
    let has = |g: &ValidatedGraph, c| {
        g.enabled(c)
            .iter()
            .any(|m| g.action_name(m.action) == cx.action)
    };
    let (la, rb) = (has(a, &cx.left.endpoint), has(b, &cx.right.endpoint));
    ensure(
        match cx.available_in {
            Side::Left => la && !rb,
            Side::Right => rb && !la,
        },
        || "distinguishing action is not exclusive to the reported side".into(),
    )?;
    let greatest = naive_bisimulation(a.model(), b.model());
    ensure(
        !greatest.contains(&(
            Oracle::new(a.model()).initial(),
            Oracle::new(b.model()).initial(),
        )),
        || "naive fixpoint relates the initial configurations".into(),
    )?;
    ensure(
        !greatest.contains(&(named(a, &cx.left.endpoint), named(b, &cx.right.endpoint))),
        || "naive fixpoint relates the counterexample endpoints".into(),
    )?;
    let second = started.elapsed();
    ensure(second < FAST, || {
        format!("non-bisimilar case took {second:?}")
    })?;
    Ok(format!(
        "{} related pairs; counterexample {} then `{}` on the {}",
        relation.len(),
        cx.left.describe(a),
        cx.action,
        cx.available_in
    ))
}

fn product_labels(p: &ProductSystem, m: &ProductMove) -> String {
    match m {
        ProductMove::Single { side, step } => {
            format!("{side}:{}", p.graph(*side).edge_name(step.edge))
        }
        ProductMove::Joint { left, right } => {
            format!(
                "{}|{}",
                p.left.edge_name(left.edge),
                p.right.edge_name(right.edge)
            )
        }
    }
}

type NamedLts = (
    BTreeSet<(NamedConf, NamedConf)>,
    BTreeSet<((NamedConf, NamedConf), String, (NamedConf, NamedConf))>,
);

/// Identity on configurations is an isomorphism iff node and transition sets
/// coincide and neither side has duplicates.
fn isomorphic(p: &ProductSystem, oracle: &NamedLts) -> Result<(), String> {
    let lts = p.expand(None);
    let node = |i: usize| {
        (
            named(&p.left, &lts.nodes[i].left),
            named(&p.right, &lts.nodes[i].right),
        )
    };
    let nodes: BTreeSet<_> = (0..lts.node_count()).map(node).collect();
    ensure(nodes.len() == lts.node_count(), || {
        "duplicate product nodes".into()
    })?;
    ensure(nodes == oracle.0, || {
        format!("{} nodes vs {} in oracle", nodes.len(), oracle.0.len())
    })?;
    let edges: BTreeSet<_> = lts
        .transitions
        .iter()
        .map(|t| (node(t.source), product_labels(p, &t.label), node(t.target)))
        .collect();
    ensure(edges.len() == lts.transition_count(), || {
        "duplicate product transitions".into()
    })?;
    ensure(edges == oracle.1, || {
        format!(
            "{} transitions vs {} in oracle",
            edges.len(),
            oracle.1.len()
        )
    })
}

fn product_laws() -> Check {
    let graphs = samples(common::arb_graph(4, 6), 2 * PRODUCT_PAIRS);
    let (mut states, mut joint) = (0, 0);
    for pair in graphs.chunks(2) {
        let (l, r) = (&pair[0], &pair[1]);
        for (mode, oracle) in [
            (ProductMode::Async, shuffle_oracle(l.model(), r.model())),
            (ProductMode::Sync, sync_oracle(l.model(), r.model())),
        ] {
            let p = ProductSystem::new(l.clone(), r.clone(), IntrusionSpec::empty(), mode).unwrap();
            isomorphic(&p, &oracle).map_err(|e| {
                format!(
                    "{mode:?} {} || {}: {e}",
                    pretty(l.model()),
                    pretty(r.model())
                )
            })?;
            match mode {
                ProductMode::Async => states += oracle.0.len(),
                ProductMode::Sync => joint += oracle.1.len(),
            }
        }
    }
    Ok(format!(
        "{PRODUCT_PAIRS} pairs; {states} async states, {joint} sync transitions"
    ))
}

/// Compares enabled sets and successors on every configuration of every
/// sampled graph, reachable or not.
fn step_oracle() -> Check {
    let graphs = samples(common::arb_graph(4, 6), STEP_GRAPHS);
    let mut checked = 0;
    for g in &graphs {
        let o = Oracle::new(g.model());
        for alpha in subsets(&g.all_edges()) {
            for state in g.states() {
                let c = Configuration::new(state, alpha.clone());
                let nc = named(g, &c);
                let ours: Vec<String> = g
                    .enabled(&c)
                    .iter()
                    .map(|m| g.edge_name(m.edge).to_string())
                    .collect();
                let theirs: Vec<String> = o.enabled(&nc).into_iter().map(|m| m.0).collect();
                ensure(ours == theirs, || {
                    format!("enabled sets differ at {nc:?} in\n{}", pretty(g.model()))
                })?;
                for m in g.enabled(&c) {
                    let next = named(g, &g.step(&c, m.edge).map_err(|e| e.to_string())?.next);
                    let expected = o.step(&nc, g.edge_name(m.edge));
                    ensure(next == expected, || {
                        format!(
                            "step {} from {nc:?} gives {next:?}, oracle {expected:?} in\n{}",
                            g.edge_name(m.edge),
                            pretty(g.model())
                        )
                    })?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{STEP_GRAPHS} graphs, {checked} steps agree"))
}

fn subsets(all: &EdgeSet) -> Vec<EdgeSet> {
    let members: Vec<_> = all.iter().collect();
    (0..1u32 << members.len())
        .map(|mask| {
            members
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, e)| *e)
                .collect()
        })
        .collect()
}

fn invariants() -> Check {
    let graphs = samples(common::arb_raw(4, 6), INVARIANT_GRAPHS);
    let mut closures = 0;
    for raw in &graphs {
        let g = validate(raw).map_err(|e| format!("{e:?}"))?;
        for alpha in subsets(&g.all_edges()) {
            for e in g.edges() {
                match g.from_star(e, &alpha) {
                    Err(SemanticsError::FuelExhausted(n)) => {
                        return Err(format!(
                            "fuel {n} exhausted from {} in\n{}",
                            g.edge_name(e),
                            pretty(raw)
                        ))
                    }
                    Err(other) => return Err(other.to_string()),
                    Ok(_) => closures += 1,
                }
            }
        }
        let lts = expand(&g, None);
        let bound = g.state_count() << g.edge_count();
        ensure(lts.node_count() <= bound, || {
            format!("{} nodes exceed {bound}", lts.node_count())
        })?;
        for t in &lts.transitions {
            let effect = g.step(&lts.nodes[t.source], t.label.edge).unwrap();
            ensure(effect.next.active.is_disjoint(&effect.deactivated), || {
                "a deactivated edge stayed active".into()
            })?;
            ensure(
                effect
                    .activated
                    .difference(&effect.deactivated)
                    .is_subset(&effect.next.active),
                || "an activated edge is missing".into(),
            )?;
        }
        let text = pretty(raw);
        let once = parse_model(&text)
            .map_err(|d| format!("pretty output does not parse: {d:?}\n{text}"))?;
        let twice = parse_model(&pretty(once.model())).map_err(|d| format!("{d:?}"))?;
        ensure(twice.model() == once.model(), || {
            format!("DSL round trip changed\n{text}")
        })?;
        ensure(once.model() == &common::expressible(raw), || {
            format!("pretty output loses parts of\n{text}")
        })?;
        let json = to_json(raw);
        ensure(from_json(&json).as_ref() == Ok(raw), || {
            "JSON round trip changed the model".into()
        })?;
        ensure(to_json(&from_json(&json).unwrap()) == json, || {
            "JSON text is not canonical".into()
        })?;
    }
    Ok(format!(
        "{INVARIANT_GRAPHS} graphs, {closures} closures within fuel"
    ))
}

fn run(name: &str, limit: Duration, f: fn() -> Check) -> bool {
    let started = Instant::now();
    let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into()))
    });
    let took = started.elapsed();
    let outcome = outcome.and_then(|detail| {
        if took < limit {
            Ok(detail)
        } else {
            Err(format!("took {took:?}, limit {limit:?}"))
        }
    });
    match &outcome {
        Ok(detail) => println!("PASS  {name}: {detail} [{:.0?}]", took),
        Err(why) => println!("FAIL  {name}: {why} [{:.0?}]", took),
    }
    outcome.is_ok()
}

type Criterion = (&'static str, Duration, fn() -> Check);

fn main() -> ExitCode {
    let criteria: &[Criterion] = &[
        ("vm-expansion", FAST, vm_expansion),
        ("closure-example", FAST, closure_example),
        ("fts-stats", FAST, fts_stats),
        ("fts-analyses", FAST, fts_analyses),
        ("vm-deadlocks", FAST, vm_deadlocks),
        ("bisimulation", 2 * FAST, bisimulation),
        ("product-laws", SLOW, product_laws),
        ("step-oracle", SLOW, step_oracle),
        ("invariants", SLOW, invariants),
    ];
    let passed = criteria.iter().filter(|(n, l, f)| run(n, *l, *f)).count();
    println!("{passed}/{} criteria passed", criteria.len());
    if passed == criteria.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
