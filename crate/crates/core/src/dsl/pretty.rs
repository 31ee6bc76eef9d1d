use super::lexer::{is_ident_continue, is_ident_start};
use super::ParsedInput;
use crate::model::{EdgeDetail, ReactiveGraph};

/// True if `s` can be written as a bare identifier.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    chars.next().is_some_and(is_ident_start)
        && chars.all(is_ident_continue)
        && !s.contains("-->")
        && !matches!(
            s,
            "rg" | "init" | "by" | "enables" | "disables" | "inactive"
        )
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Canonical source text for `g`: edges in id order, inactive edges last.
///
/// Requires every name to satisfy [`is_identifier`] and every state to be
/// the initial state or a ground-edge endpoint; the notation has no way to
/// write anything else.
pub fn pretty(g: &ReactiveGraph) -> String {
    let mut out = format!("rg {} {{\n  init {};\n", g.name, g.init);
    for (id, detail) in &g.edges {
        match detail {
            EdgeDetail::Ground {
                source,
                action,
                target,
            } => out.push_str(&format!(
                "  {id}: {source} --> {target} by {};\n",
                quote(action)
            )),
            EdgeDetail::Hyper {
                source,
                target,
                polarity,
            } => out.push_str(&format!(
                "  {id}: {source} {} {target};\n",
                polarity.keyword()
            )),
        }
    }
    let inactive: Vec<&str> = g
        .edges
        .keys()
        .filter(|e| !g.active.contains(*e))
        .map(String::as_str)
        .collect();
    if !inactive.is_empty() {
        out.push_str(&format!("  inactive {};\n", inactive.join(", ")));
    }
    out.push('}');
    out
}

pub fn pretty_input(input: &ParsedInput) -> String {
    let mut out = pretty(input.primary.model());
    if let Some(c) = &input.comparand {
        out.push_str("\n~\n");
        out.push_str(&pretty(c.model()));
    }
    out
}
