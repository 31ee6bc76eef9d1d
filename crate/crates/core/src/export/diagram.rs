use std::fmt::Write;

use crate::edgeset::EdgeSet;
use crate::expansion::{InducedLts, Lts};
use crate::model::{Detail, EdgeIx, Polarity, StateIx, ValidatedGraph};
use crate::products::{ProductLts, ProductSystem};
use crate::semantics::Configuration;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiagramFormat {
    Mermaid,
    Dot,
}

/// What part of a graph to draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum View<'a> {
    /// Every state and edge, with activity taken from the initial configuration.
    Global,
    /// Every state and edge, with activity and the current state taken from a configuration.
    GlobalAt(&'a Configuration),
    /// States and active ground edges only, current state highlighted.
    Local(&'a Configuration),
}

const ON_COLOUR: &str = "#15803d";
const OFF_COLOUR: &str = "#b91c1c";
const CURRENT_STYLE: &str = "fill:#fde68a,stroke:#b45309,stroke-width:2px";

fn mermaid_label(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "#quot;"))
}

fn dot_label(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn state_node(s: StateIx) -> String {
    format!("s{}", s.0)
}

fn edge_node(e: EdgeIx) -> String {
    format!("e{}", e.0)
}

fn edge_caption(g: &ValidatedGraph, e: EdgeIx) -> String {
    match g.detail(e) {
        Some(Detail::Ground { action, .. }) => {
            format!("{}: {}", g.edge_name(e), g.action_name(action))
        }
        _ => g.edge_name(e).to_string(),
    }
}

/// Renders `g` in the requested view.
///
/// In the global views every edge gets its own node so that hyper edges can
/// point at edges. A ground edge is drawn as `source -- label -- target`, a
/// hyper edge as `source edge -- hyper node -- target edge`; activating hyper
/// edges end in an arrow, deactivating ones in a cross, and inactive edges
/// are dashed.
pub fn to_diagram(g: &ValidatedGraph, view: View<'_>, format: DiagramFormat) -> String {
    let (active, current, local) = match view {
        View::Global => (g.initial_active().clone(), None, false),
        View::GlobalAt(c) => (c.active.clone(), Some(c.state), false),
        View::Local(c) => (c.active.clone(), Some(c.state), true),
    };
    match (format, local) {
        (DiagramFormat::Mermaid, false) => mermaid_global(g, &active, current),
        (DiagramFormat::Mermaid, true) => mermaid_local(g, &active, current),
        (DiagramFormat::Dot, false) => dot_global(g, &active, current),
        (DiagramFormat::Dot, true) => dot_local(g, &active, current),
    }
}

fn mermaid_states(out: &mut String, g: &ValidatedGraph) {
    for s in g.states() {
        writeln!(
            out,
            "  {}(({}))",
            state_node(s),
            mermaid_label(g.state_name(s))
        )
        .unwrap();
    }
}

fn mermaid_marks(out: &mut String, g: &ValidatedGraph, current: Option<StateIx>) {
    writeln!(out, "  classDef initial stroke-width:3px").unwrap();
    writeln!(out, "  class {} initial", state_node(g.init())).unwrap();
    if let Some(s) = current {
        writeln!(out, "  classDef current {CURRENT_STYLE}").unwrap();
        writeln!(out, "  class {} current", state_node(s)).unwrap();
    }
}

fn mermaid_global(g: &ValidatedGraph, active: &EdgeSet, current: Option<StateIx>) -> String {
    let mut out = String::from("flowchart LR\n");
    mermaid_states(&mut out, g);
    for e in g.edges() {
        let shape = if g.is_hyper(e) {
            ("{{", "}}")
        } else {
            ("[", "]")
        };
        writeln!(
            out,
            "  {}{}{}{}",
            edge_node(e),
            shape.0,
            mermaid_label(&edge_caption(g, e)),
            shape.1
        )
        .unwrap();
    }
    let mut link = 0;
    let mut styles = Vec::new();
    for e in g.edges() {
        let on = active.contains(e);
        let (line, tail) = if on { ("---", "--") } else { ("-.-", "-.-") };
        let arrow = |head: char| format!("{tail}{head}");
        match g.detail(e) {
            Some(Detail::Ground { source, target, .. }) => {
                writeln!(
                    out,
                    "  {} {line} {} {} {}",
                    state_node(source),
                    edge_node(e),
                    arrow('>'),
                    state_node(target)
                )
                .unwrap();
            }
            Some(Detail::Hyper {
                source,
                target,
                polarity,
            }) => {
                let (head, colour) = match polarity {
                    Polarity::On => ('>', ON_COLOUR),
                    Polarity::Off => ('x', OFF_COLOUR),
                };
                writeln!(
                    out,
                    "  {} {line} {} {} {}",
                    edge_node(source),
                    edge_node(e),
                    arrow(head),
                    edge_node(target)
                )
                .unwrap();
                styles.push(format!("  linkStyle {},{} stroke:{colour}", link, link + 1));
            }
            None => unreachable!("edge indices come from the graph"),
        }
        link += 2;
    }
    for s in styles {
        writeln!(out, "{s}").unwrap();
    }
    mermaid_marks(&mut out, g, current);
    out
}

fn mermaid_local(g: &ValidatedGraph, active: &EdgeSet, current: Option<StateIx>) -> String {
    let mut out = String::from("flowchart LR\n");
    mermaid_states(&mut out, g);
    for e in active.iter() {
        if let Some(Detail::Ground {
            source,
            action,
            target,
        }) = g.detail(e)
        {
            writeln!(
                out,
                "  {} -->|{}| {}",
                state_node(source),
                mermaid_label(g.action_name(action)),
                state_node(target)
            )
            .unwrap();
        }
    }
    mermaid_marks(&mut out, g, current);
    out
}

fn dot_header(out: &mut String, name: &str) {
    writeln!(out, "digraph {} {{", dot_label(name)).unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
}

fn dot_states(out: &mut String, g: &ValidatedGraph, current: Option<StateIx>) {
    for s in g.states() {
        let mut attrs = format!("label={}, shape=ellipse", dot_label(g.state_name(s)));
        if s == g.init() {
            attrs.push_str(", penwidth=3");
        }
        if Some(s) == current {
            attrs.push_str(", style=filled, fillcolor=\"#fde68a\"");
        }
        writeln!(out, "  {} [{attrs}];", state_node(s)).unwrap();
    }
}

fn dot_global(g: &ValidatedGraph, active: &EdgeSet, current: Option<StateIx>) -> String {
    let mut out = String::new();
    dot_header(&mut out, g.name());
    dot_states(&mut out, g, current);
    for e in g.edges() {
        let shape = if g.is_hyper(e) { "diamond" } else { "box" };
        writeln!(
            out,
            "  {} [label={}, shape={shape}];",
            edge_node(e),
            dot_label(&edge_caption(g, e))
        )
        .unwrap();
    }
    for e in g.edges() {
        let dashed = if active.contains(e) {
            ""
        } else {
            ", style=dashed"
        };
        match g.detail(e) {
            Some(Detail::Ground { source, target, .. }) => {
                writeln!(
                    out,
                    "  {} -> {} [arrowhead=none{dashed}];",
                    state_node(source),
                    edge_node(e)
                )
                .unwrap();
                writeln!(
                    out,
                    "  {} -> {} [{}];",
                    edge_node(e),
                    state_node(target),
                    dashed.trim_start_matches(", ")
                )
                .unwrap();
            }
            Some(Detail::Hyper {
                source,
                target,
                polarity,
            }) => {
                let (head, colour) = match polarity {
                    Polarity::On => ("normal", ON_COLOUR),
                    Polarity::Off => ("tee", OFF_COLOUR),
                };
                writeln!(
                    out,
                    "  {} -> {} [arrowhead=none, color=\"{colour}\"{dashed}];",
                    edge_node(source),
                    edge_node(e)
                )
                .unwrap();
                writeln!(
                    out,
                    "  {} -> {} [arrowhead={head}, color=\"{colour}\"{dashed}];",
                    edge_node(e),
                    edge_node(target)
                )
                .unwrap();
            }
            None => unreachable!("edge indices come from the graph"),
        }
    }
    out.push_str("}\n");
    out
}

fn dot_local(g: &ValidatedGraph, active: &EdgeSet, current: Option<StateIx>) -> String {
    let mut out = String::new();
    dot_header(&mut out, g.name());
    dot_states(&mut out, g, current);
    for e in active.iter() {
        if let Some(Detail::Ground {
            source,
            action,
            target,
        }) = g.detail(e)
        {
            writeln!(
                out,
                "  {} -> {} [label={}];",
                state_node(source),
                state_node(target),
                dot_label(g.action_name(action))
            )
            .unwrap();
        }
    }
    out.push_str("}\n");
    out
}

fn generic_lts<C, L>(
    name: &str,
    lts: &Lts<C, L>,
    format: DiagramFormat,
    node: impl Fn(&C) -> String,
    label: impl Fn(&L) -> String,
) -> String {
    let mut out = String::new();
    match format {
        DiagramFormat::Mermaid => {
            out.push_str("flowchart LR\n");
            if lts.truncated {
                writeln!(out, "  %% truncated at {} states", lts.node_count()).unwrap();
            }
            for (i, c) in lts.nodes.iter().enumerate() {
                writeln!(out, "  n{i}[{}]", mermaid_label(&node(c))).unwrap();
            }
            for t in &lts.transitions {
                writeln!(
                    out,
                    "  n{} -->|{}| n{}",
                    t.source,
                    mermaid_label(&label(&t.label)),
                    t.target
                )
                .unwrap();
            }
            out.push_str("  classDef initial stroke-width:3px\n  class n0 initial\n");
        }
        DiagramFormat::Dot => {
            dot_header(&mut out, name);
            if lts.truncated {
                writeln!(out, "  // truncated at {} states", lts.node_count()).unwrap();
            }
            for (i, c) in lts.nodes.iter().enumerate() {
                let bold = if i == 0 { ", penwidth=3" } else { "" };
                writeln!(
                    out,
                    "  n{i} [label={}, shape=box{bold}];",
                    dot_label(&node(c))
                )
                .unwrap();
            }
            for t in &lts.transitions {
                writeln!(
                    out,
                    "  n{} -> n{} [label={}];",
                    t.source,
                    t.target,
                    dot_label(&label(&t.label))
                )
                .unwrap();
            }
            out.push_str("}\n");
        }
    }
    out
}

/// Renders an induced LTS; nodes show their configuration, node 0 is initial.
pub fn lts_diagram(g: &ValidatedGraph, lts: &InducedLts, format: DiagramFormat) -> String {
    generic_lts(
        g.name(),
        lts,
        format,
        |c| g.describe(c),
        |l| g.action_name(l.action).to_string(),
    )
}

/// Renders a product LTS.
pub fn product_lts_diagram(p: &ProductSystem, lts: &ProductLts, format: DiagramFormat) -> String {
    let name = format!("{} || {}", p.left.name(), p.right.name());
    generic_lts(
        &name,
        lts,
        format,
        |pc| {
            format!(
                "{} | {}",
                p.left.describe(&pc.left),
                p.right.describe(&pc.right)
            )
        },
        |m| p.action_of(m).to_string(),
    )
}
