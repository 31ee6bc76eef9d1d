use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::dsl::ParsedInput;
use crate::expansion::{InducedLts, Lts};
use crate::model::{validate, EdgeDetail, ModelErrors, Polarity, ReactiveGraph, ValidatedGraph};
use crate::products::{ProductConfiguration, ProductLts, ProductMove, ProductSystem};
use crate::semantics::Configuration;

/// A document that does not match the model schema.
///
/// `path` is a JSON pointer to the offending value, or to the place where a
/// missing member was expected.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct SchemaError {
    pub path: String,
    pub message: String,
}

impl SchemaError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        SchemaError {
            path: path.into(),
            message: message.into(),
        }
    }
}

fn pointer(base: &str, token: &str) -> String {
    format!("{base}/{}", token.replace('~', "~0").replace('/', "~1"))
}

fn render(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values always serialize")
}

fn strings<'a>(items: impl IntoIterator<Item = &'a String>) -> Value {
    Value::Array(items.into_iter().cloned().map(Value::String).collect())
}

/// The model as a JSON value.
pub fn model_json(g: &ReactiveGraph) -> Value {
    let edges: Map<String, Value> = g
        .edges
        .iter()
        .map(|(id, d)| {
            let v = match d {
                EdgeDetail::Ground {
                    source,
                    action,
                    target,
                } => {
                    json!({"kind": "ground", "source": source, "action": action, "target": target})
                }
                EdgeDetail::Hyper {
                    source,
                    target,
                    polarity,
                } => json!({
                    "kind": "hyper",
                    "source": source,
                    "target": target,
                    "polarity": polarity_name(*polarity),
                }),
            };
            (id.clone(), v)
        })
        .collect();
    json!({
        "name": g.name,
        "init": g.init,
        "states": strings(&g.states),
        "actions": strings(&g.actions),
        "edges": edges,
        "active": strings(&g.active),
    })
}

fn polarity_name(p: Polarity) -> &'static str {
    match p {
        Polarity::On => "on",
        Polarity::Off => "off",
    }
}

/// Canonical JSON text of a model.
pub fn to_json(g: &ReactiveGraph) -> String {
    render(&model_json(g))
}

/// Canonical JSON text of a parsed program: `{"primary": .., "comparand": ..}`.
pub fn input_to_json(input: &ParsedInput) -> String {
    render(&json!({
        "primary": model_json(input.primary.model()),
        "comparand": input.comparand.as_ref().map(|c| model_json(c.model())),
    }))
}

pub fn configuration_json(g: &ValidatedGraph, c: &Configuration) -> Value {
    json!({
        "state": g.state_name(c.state),
        "active": g.edge_set_names(&c.active),
    })
}

pub fn product_configuration_json(p: &ProductSystem, pc: &ProductConfiguration) -> Value {
    json!({
        "left": configuration_json(&p.left, &pc.left),
        "right": configuration_json(&p.right, &pc.right),
    })
}

fn generic_lts_json<C, L>(
    name: &str,
    lts: &Lts<C, L>,
    node: impl Fn(&C) -> Value,
    label: impl Fn(&L) -> Map<String, Value>,
) -> Value {
    let nodes: Vec<Value> = lts
        .nodes
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut v = node(c);
            if let Value::Object(m) = &mut v {
                m.insert("id".into(), json!(i));
            }
            v
        })
        .collect();
    let transitions: Vec<Value> = lts
        .transitions
        .iter()
        .map(|t| {
            let mut m = label(&t.label);
            m.insert("source".into(), json!(t.source));
            m.insert("target".into(), json!(t.target));
            Value::Object(m)
        })
        .collect();
    json!({
        "name": name,
        "initial": 0,
        "truncated": lts.truncated,
        "nodes": nodes,
        "transitions": transitions,
    })
}

/// The induced LTS as a JSON value; nodes carry their configuration.
pub fn lts_json(g: &ValidatedGraph, lts: &InducedLts) -> Value {
    generic_lts_json(
        g.name(),
        lts,
        |c| configuration_json(g, c),
        |l| {
            let mut m = Map::new();
            m.insert("action".into(), json!(g.action_name(l.action)));
            m.insert("edge".into(), json!(g.edge_name(l.edge)));
            m
        },
    )
}

pub fn lts_to_json(g: &ValidatedGraph, lts: &InducedLts) -> String {
    render(&lts_json(g, lts))
}

/// A product LTS as a JSON value. Moves list the edge fired on each side
/// that took part.
pub fn product_lts_json(p: &ProductSystem, lts: &ProductLts) -> Value {
    let name = format!("{} || {}", p.left.name(), p.right.name());
    generic_lts_json(
        &name,
        lts,
        |pc| product_configuration_json(p, pc),
        |m| {
            let mut out = Map::new();
            out.insert("action".into(), json!(p.action_of(m)));
            match m {
                ProductMove::Single { side, step } => {
                    out.insert(
                        side.name().into(),
                        json!(p.graph(*side).edge_name(step.edge)),
                    );
                }
                ProductMove::Joint { left, right } => {
                    out.insert("left".into(), json!(p.left.edge_name(left.edge)));
                    out.insert("right".into(), json!(p.right.edge_name(right.edge)));
                }
            }
            out
        },
    )
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, SchemaError> {
    v.as_object()
        .ok_or_else(|| SchemaError::new(path, "expected an object"))
}

fn member<'a>(m: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a Value, SchemaError> {
    m.get(key).ok_or_else(|| {
        SchemaError::new(
            pointer(path, key),
            format!("missing required member `{key}`"),
        )
    })
}

fn string(v: &Value, path: &str) -> Result<String, SchemaError> {
    v.as_str()
        .map(str::to_string)
        .ok_or_else(|| SchemaError::new(path, "expected a string"))
}

fn no_extra(m: &Map<String, Value>, path: &str, allowed: &[&str]) -> Result<(), SchemaError> {
    match m.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(SchemaError::new(
            pointer(path, k),
            format!("unexpected member `{k}`"),
        )),
        None => Ok(()),
    }
}

fn string_set(v: &Value, path: &str) -> Result<BTreeSet<String>, SchemaError> {
    let items = v
        .as_array()
        .ok_or_else(|| SchemaError::new(path, "expected an array of strings"))?;
    let mut out = BTreeSet::new();
    for (i, item) in items.iter().enumerate() {
        let p = pointer(path, &i.to_string());
        if !out.insert(string(item, &p)?) {
            return Err(SchemaError::new(p, "duplicate set member"));
        }
    }
    Ok(out)
}

fn edge_detail(v: &Value, path: &str) -> Result<EdgeDetail, SchemaError> {
    let m = object(v, path)?;
    let kind_path = pointer(path, "kind");
    let field = |key: &str| string(member(m, path, key)?, &pointer(path, key));
    match member(m, path, "kind")?.as_str() {
        Some("ground") => {
            no_extra(m, path, &["kind", "source", "action", "target"])?;
            Ok(EdgeDetail::Ground {
                source: field("source")?,
                action: field("action")?,
                target: field("target")?,
            })
        }
        Some("hyper") => {
            no_extra(m, path, &["kind", "source", "target", "polarity"])?;
            let polarity = match field("polarity")?.as_str() {
                "on" => Polarity::On,
                "off" => Polarity::Off,
                _ => {
                    return Err(SchemaError::new(
                        pointer(path, "polarity"),
                        "expected \"on\" or \"off\"",
                    ))
                }
            };
            Ok(EdgeDetail::Hyper {
                source: field("source")?,
                target: field("target")?,
                polarity,
            })
        }
        _ => Err(SchemaError::new(
            kind_path,
            "expected \"ground\" or \"hyper\"",
        )),
    }
}

/// Decodes a model document held as a JSON value rooted at `path`.
///
/// Only the shape is checked here; well-formedness is left to
/// [`validate`].
pub fn model_from_value(v: &Value, path: &str) -> Result<ReactiveGraph, SchemaError> {
    let m = object(v, path)?;
    no_extra(
        m,
        path,
        &["name", "init", "states", "actions", "edges", "active"],
    )?;
    let name = string(member(m, path, "name")?, &pointer(path, "name"))?;
    let init = string(member(m, path, "init")?, &pointer(path, "init"))?;
    let states = string_set(member(m, path, "states")?, &pointer(path, "states"))?;
    let actions = string_set(member(m, path, "actions")?, &pointer(path, "actions"))?;
    let edges_path = pointer(path, "edges");
    let mut edges = BTreeMap::new();
    for (id, d) in object(member(m, path, "edges")?, &edges_path)? {
        edges.insert(id.clone(), edge_detail(d, &pointer(&edges_path, id))?);
    }
    let active = string_set(member(m, path, "active")?, &pointer(path, "active"))?;
    Ok(ReactiveGraph {
        name,
        states,
        actions,
        edges,
        init,
        active,
    })
}

fn parse_text(text: &str) -> Result<Value, SchemaError> {
    serde_json::from_str(text).map_err(|e| SchemaError::new("", format!("invalid JSON: {e}")))
}

/// Reads a model document written by [`to_json`].
pub fn from_json(text: &str) -> Result<ReactiveGraph, SchemaError> {
    model_from_value(&parse_text(text)?, "")
}

/// Reads a document written by [`input_to_json`] and validates both models.
pub fn input_from_json(text: &str) -> Result<ParsedInput, SchemaError> {
    let v = parse_text(text)?;
    let m = object(&v, "")?;
    no_extra(m, "", &["primary", "comparand"])?;
    let checked = |path: &str, v: &Value| {
        let raw = model_from_value(v, path)?;
        validate(&raw).map_err(|errs| SchemaError::new(path, ModelErrors(&errs).to_string()))
    };
    let primary = checked("/primary", member(m, "", "primary")?)?;
    let comparand = match m.get("comparand") {
        None | Some(Value::Null) => None,
        Some(c) => Some(checked("/comparand", c)?),
    };
    Ok(ParsedInput { primary, comparand })
}
