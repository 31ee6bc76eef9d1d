//! Stateful request/response protocol over newline-delimited JSON.
//!
//! Each request is one line `{"id": "..", "op": "..", "payload": {..}}` and
//! gets exactly one response line `{"id": "..", "ok": true, "result": ..}` or
//! `{"id": "..", "ok": false, "error": {"code": "..", "message": ".."}}`.
//! A session holds the current model and configuration and, separately, the
//! current product. Responses are compact canonical JSON, so replaying a
//! request log reproduces the response log byte for byte.

use std::io::{self, BufRead, Write};

use serde_json::{json, Value};

use crate::analysis::{bisimilar_lts, Analysis, BisimResult, Trace};
use crate::dsl::{parse, parse_intrusions, parse_model, Diagnostic, ParsedInput};
use crate::edgeset::EdgeSet;
use crate::expansion::{expand, stats, InducedLts, DEFAULT_MAX_STATES};
use crate::export::{
    configuration_json, input_from_json, lts_diagram, lts_json, model_json,
    product_configuration_json, product_lts_diagram, product_lts_json, to_diagram, DiagramFormat,
    View,
};
use crate::model::{EdgeIx, ValidatedGraph};
use crate::products::{
    IntrusionSpec, ProductConfiguration, ProductMode, ProductMove, ProductSystem, SideChange,
};
use crate::semantics::{Configuration, Move, SemanticsError};

/// Every operation the protocol understands.
pub const OPS: &[&str] = &[
    "load",
    "enabled",
    "step",
    "reset",
    "expand",
    "stats",
    "deadlocks",
    "conflicts",
    "unreachable",
    "bisim",
    "product-load",
    "product-enabled",
    "product-step",
    "export",
];

/// A failed request.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolError {
    pub code: &'static str,
    pub message: String,
    /// Extra machine-readable detail, such as parse diagnostics.
    pub data: Option<Value>,
}

impl ProtocolError {
    fn new(code: &'static str, message: impl Into<String>) -> Self {
        ProtocolError {
            code,
            message: message.into(),
            data: None,
        }
    }

    fn with_data(mut self, data: Value) -> Self {
        self.data = Some(data);
        self
    }

    fn to_json(&self) -> Value {
        let mut v = json!({"code": self.code, "message": self.message});
        if let Some(d) = &self.data {
            v["data"] = d.clone();
        }
        v
    }
}

type OpResult = Result<Value, ProtocolError>;

struct Loaded {
    input: ParsedInput,
    current: Configuration,
    lts: Option<InducedLts>,
}

struct LoadedProduct {
    system: ProductSystem,
    current: ProductConfiguration,
}

#[derive(Default)]
pub struct Session {
    model: Option<Loaded>,
    product: Option<LoadedProduct>,
}

fn diagnostics_json(diags: &[Diagnostic]) -> Value {
    Value::Array(
        diags
            .iter()
            .map(|d| {
                json!({
                    "code": d.kind.code(),
                    "message": d.message,
                    "line": d.span.line,
                    "column": d.span.column,
                    "length": d.span.length,
                })
            })
            .collect(),
    )
}

fn parse_error(what: &str, diags: Vec<Diagnostic>) -> ProtocolError {
    let mut message = format!("{what} does not parse");
    if let Some(first) = diags.first() {
        message = format!("{message}: {first}");
    }
    ProtocolError::new("ParseError", message).with_data(diagnostics_json(&diags))
}

fn str_field<'a>(payload: &'a Value, key: &str) -> Result<Option<&'a str>, ProtocolError> {
    match payload.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(_) => Err(ProtocolError::new(
            "InvalidPayload",
            format!("`{key}` must be a string"),
        )),
    }
}

fn required_str<'a>(payload: &'a Value, key: &str) -> Result<&'a str, ProtocolError> {
    str_field(payload, key)?
        .ok_or_else(|| ProtocolError::new("InvalidPayload", format!("missing string `{key}`")))
}

fn max_states(payload: &Value) -> Result<usize, ProtocolError> {
    match payload.get("max_states") {
        None | Some(Value::Null) => Ok(DEFAULT_MAX_STATES),
        Some(v) => v
            .as_u64()
            .filter(|&n| n > 0)
            .map(|n| n as usize)
            .ok_or_else(|| {
                ProtocolError::new("InvalidPayload", "`max_states` must be a positive integer")
            }),
    }
}

fn move_json(g: &ValidatedGraph, m: &Move) -> Value {
    json!({
        "edge": g.edge_name(m.edge),
        "action": g.action_name(m.action),
        "target": g.state_name(m.target),
    })
}

fn names(g: &ValidatedGraph, set: &EdgeSet) -> Value {
    json!(g.edge_set_names(set))
}

fn trace_json(g: &ValidatedGraph, t: &Trace) -> Value {
    json!({
        "steps": t.steps.iter().map(|s| json!({
            "edge": g.edge_name(s.edge),
            "action": g.action_name(s.action),
        })).collect::<Vec<_>>(),
        "endpoint": configuration_json(g, &t.endpoint),
    })
}

fn semantics_error(e: SemanticsError) -> ProtocolError {
    let code = match e {
        SemanticsError::EdgeNotEnabled(_) => "EdgeNotEnabled",
        SemanticsError::UnknownEdge(_) => "UnknownEdge",
        SemanticsError::InvalidConfiguration => "InvalidConfiguration",
        SemanticsError::FuelExhausted(_) => "FuelExhausted",
    };
    ProtocolError::new(code, e.to_string())
}

fn mode_of(payload: &Value) -> Result<ProductMode, ProtocolError> {
    match str_field(payload, "mode")? {
        None | Some("async") => Ok(ProductMode::Async),
        Some("sync") => Ok(ProductMode::Sync),
        Some(other) => Err(ProtocolError::new(
            "InvalidPayload",
            format!("unknown mode `{other}`, expected async or sync"),
        )),
    }
}

fn format_of(payload: &Value) -> Result<Option<DiagramFormat>, ProtocolError> {
    match str_field(payload, "format")? {
        None | Some("json") => Ok(None),
        Some("mermaid") => Ok(Some(DiagramFormat::Mermaid)),
        Some("dot") => Ok(Some(DiagramFormat::Dot)),
        Some(other) => Err(ProtocolError::new(
            "InvalidPayload",
            format!("unknown format `{other}`, expected json, mermaid or dot"),
        )),
    }
}

impl Session {
    pub fn new() -> Self {
        Self::default()
    }

    /// Handles one request line and returns the response line.
    pub fn handle_line(&mut self, line: &str) -> String {
        let response = match serde_json::from_str::<Value>(line) {
            Ok(request) => self.handle(&request),
            Err(e) => json!({
                "id": null,
                "ok": false,
                "error": ProtocolError::new("MalformedJson", e.to_string()).to_json(),
            }),
        };
        response.to_string()
    }

    /// Handles one decoded request.
    pub fn handle(&mut self, request: &Value) -> Value {
        let id = request.get("id").cloned().unwrap_or(Value::Null);
        let outcome = match (request.get("op").and_then(Value::as_str), id.is_string()) {
            (_, false) => Err(ProtocolError::new(
                "MalformedRequest",
                "`id` must be a string",
            )),
            (None, _) => Err(ProtocolError::new(
                "MalformedRequest",
                "`op` must be a string",
            )),
            (Some(op), _) => {
                let payload = request.get("payload").cloned().unwrap_or(json!({}));
                if payload.is_object() {
                    self.dispatch(op, &payload)
                } else {
                    Err(ProtocolError::new(
                        "InvalidPayload",
                        "`payload` must be an object",
                    ))
                }
            }
        };
        match outcome {
            Ok(result) => json!({"id": id, "ok": true, "result": result}),
            Err(e) => json!({"id": id, "ok": false, "error": e.to_json()}),
        }
    }

    /// Reads requests line by line until end of input. Blank lines are skipped.
    pub fn serve<R: BufRead, W: Write>(&mut self, input: R, mut output: W) -> io::Result<()> {
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            writeln!(output, "{}", self.handle_line(&line))?;
            output.flush()?;
        }
        Ok(())
    }

    fn dispatch(&mut self, op: &str, payload: &Value) -> OpResult {
        match op {
            "load" => self.load(payload),
            "enabled" => self.enabled(),
            "step" => self.step(payload),
            "reset" => self.reset(),
            "expand" => self.expand(payload),
            "stats" => self.stats(payload),
            "deadlocks" => self.deadlocks(payload),
            "conflicts" => self.conflicts(payload),
            "unreachable" => self.unreachable(payload),
            "bisim" => self.bisim(payload),
            "product-load" => self.product_load(payload),
            "product-enabled" => self.product_enabled(),
            "product-step" => self.product_step(payload),
            "export" => self.export(payload),
            other => Err(ProtocolError::new(
                "UnknownOp",
                format!("unknown op `{other}`"),
            )),
        }
    }

    fn loaded(&self) -> Result<&Loaded, ProtocolError> {
        self.model
            .as_ref()
            .ok_or_else(|| ProtocolError::new("NoModel", "no model loaded"))
    }

    fn view(&self) -> Result<Value, ProtocolError> {
        let m = self.loaded()?;
        let g = &m.input.primary;
        Ok(json!({
            "configuration": configuration_json(g, &m.current),
            "description": g.describe(&m.current),
            "moves": g.enabled(&m.current).iter().map(|mv| move_json(g, mv)).collect::<Vec<_>>(),
        }))
    }

    fn load(&mut self, payload: &Value) -> OpResult {
        let input = match (str_field(payload, "source")?, payload.get("json")) {
            (Some(src), None) => parse(src).map_err(|d| parse_error("source", d))?,
            (None, Some(doc)) => {
                let text = if doc.get("primary").is_some() {
                    doc.to_string()
                } else {
                    json!({"primary": doc}).to_string()
                };
                input_from_json(&text).map_err(|e| {
                    ProtocolError::new("SchemaError", e.to_string())
                        .with_data(json!({"path": e.path}))
                })?
            }
            _ => {
                return Err(ProtocolError::new(
                    "InvalidPayload",
                    "expected exactly one of `source` or `json`",
                ))
            }
        };
        let g = &input.primary;
        let summary = json!({
            "name": g.name(),
            "states": g.state_count(),
            "ground_edges": g.ground_count(),
            "hyper_edges": g.hyper_count(),
            "comparand": input.comparand.as_ref().map(|c| c.name()),
        });
        self.model = Some(Loaded {
            current: g.initial_configuration(),
            input,
            lts: None,
        });
        let mut out = self.view()?;
        out["model"] = summary;
        Ok(out)
    }

    fn enabled(&self) -> OpResult {
        self.view()
    }

    fn reset(&mut self) -> OpResult {
        let m = self
            .model
            .as_mut()
            .ok_or_else(|| ProtocolError::new("NoModel", "no model loaded"))?;
        m.current = m.input.primary.initial_configuration();
        self.view()
    }

    fn step(&mut self, payload: &Value) -> OpResult {
        let id = required_str(payload, "edge")?;
        let m = self
            .model
            .as_mut()
            .ok_or_else(|| ProtocolError::new("NoModel", "no model loaded"))?;
        let g = &m.input.primary;
        let e = g
            .edge(id)
            .ok_or_else(|| ProtocolError::new("UnknownEdge", format!("no edge named `{id}`")))?;
        let effect = g.step(&m.current, e).map_err(semantics_error)?;
        let changes = json!({
            "fired": g.edge_name(effect.fired),
            "action": g.action_name(effect.action),
            "triggered": names(g, &effect.triggered),
            "activated": names(g, &effect.activated),
            "deactivated": names(g, &effect.deactivated),
            "conflicts": names(g, &effect.conflicts),
        });
        m.current = effect.next;
        let mut out = self.view()?;
        out["effect"] = changes;
        Ok(out)
    }

    /// The cached expansion, recomputed when a different bound is requested.
    fn lts(&mut self, payload: &Value) -> Result<&Loaded, ProtocolError> {
        let bound = max_states(payload)?;
        let explicit = payload.get("max_states").is_some_and(|v| !v.is_null());
        let m = self
            .model
            .as_mut()
            .ok_or_else(|| ProtocolError::new("NoModel", "no model loaded"))?;
        if m.lts.is_none() || explicit {
            m.lts = Some(expand(&m.input.primary, Some(bound)));
        }
        Ok(m)
    }

    fn expand(&mut self, payload: &Value) -> OpResult {
        let m = self.lts(payload)?;
        Ok(lts_json(&m.input.primary, m.lts.as_ref().unwrap()))
    }

    fn stats(&mut self, payload: &Value) -> OpResult {
        let m = self.lts(payload)?;
        let lts = m.lts.as_ref().unwrap();
        let s = stats(&m.input.primary, lts);
        Ok(json!({
            "rg_states": s.rg_states,
            "rg_ground_edges": s.rg_ground_edges,
            "rg_hyper_edges": s.rg_hyper_edges,
            "lts_states": s.lts_states,
            "lts_edges": s.lts_edges,
            "truncated": lts.truncated,
            "summary": s.to_string(),
        }))
    }

    fn analysis(
        &mut self,
        payload: &Value,
    ) -> Result<(&ValidatedGraph, Analysis<'_>, bool), ProtocolError> {
        let m = self.lts(payload)?;
        let lts = m.lts.clone().unwrap();
        let truncated = lts.truncated;
        let g = &m.input.primary;
        Ok((g, Analysis::with_lts(g, lts), truncated))
    }

    fn deadlocks(&mut self, payload: &Value) -> OpResult {
        let (g, a, truncated) = self.analysis(payload)?;
        let found: Vec<Value> = a
            .deadlocks()
            .iter()
            .map(|d| json!({"configuration": configuration_json(g, &d.configuration), "trace": trace_json(g, &d.trace)}))
            .collect();
        Ok(json!({"count": found.len(), "deadlocks": found, "truncated": truncated}))
    }

    fn conflicts(&mut self, payload: &Value) -> OpResult {
        let (g, a, truncated) = self.analysis(payload)?;
        let found: Vec<Value> = a
            .conflicts()
            .iter()
            .map(|c| {
                json!({
                    "trace": trace_json(g, &c.trace),
                    "fired": g.edge_name(c.fired),
                    "conflicting": names(g, &c.conflicting),
                })
            })
            .collect();
        Ok(json!({"count": found.len(), "conflicts": found, "truncated": truncated}))
    }

    fn unreachable(&mut self, payload: &Value) -> OpResult {
        let (g, a, truncated) = self.analysis(payload)?;
        let edges = a.unreachable_edges();
        let edge_names = |v: &[EdgeIx]| v.iter().map(|e| g.edge_name(*e)).collect::<Vec<_>>();
        Ok(json!({
            "states": a.unreachable_states().iter().map(|s| g.state_name(*s)).collect::<Vec<_>>(),
            "never_fired": edge_names(&edges.never_fired),
            "never_triggered": edge_names(&edges.never_triggered),
            "truncated": truncated,
        }))
    }

    fn bisim(&mut self, payload: &Value) -> OpResult {
        let m = self.loaded()?;
        let a = &m.input.primary;
        let other;
        let b = match str_field(payload, "other")? {
            Some(src) => {
                other = parse_model(src).map_err(|d| parse_error("`other`", d))?;
                &other
            }
            None => m.input.comparand.as_ref().ok_or_else(|| {
                ProtocolError::new("NoComparand", "the loaded input has no `~` comparand")
            })?,
        };
        let bound = max_states(payload)?;
        let (la, lb) = (expand(a, Some(bound)), expand(b, Some(bound)));
        if la.truncated || lb.truncated {
            return Err(ProtocolError::new(
                "Truncated",
                format!("expansion exceeded {bound} states; bisimilarity is undecided"),
            ));
        }
        Ok(match bisimilar_lts(a, &la, b, &lb) {
            BisimResult::Bisimilar { relation } => json!({
                "bisimilar": true,
                "relation": relation
                    .iter()
                    .map(|(p, q)| json!([configuration_json(a, p), configuration_json(b, q)]))
                    .collect::<Vec<_>>(),
            }),
            BisimResult::NotBisimilar(cx) => json!({
                "bisimilar": false,
                "counterexample": {
                    "left": trace_json(a, &cx.left),
                    "right": trace_json(b, &cx.right),
                    "action": cx.action,
                    "available_in": cx.available_in.name(),
                },
            }),
        })
    }

    fn product(&self) -> Result<&LoadedProduct, ProtocolError> {
        self.product
            .as_ref()
            .ok_or_else(|| ProtocolError::new("NoProduct", "no product loaded"))
    }

    fn product_move_json(p: &ProductSystem, index: usize, m: &ProductMove) -> Value {
        let mut v = json!({
            "index": index,
            "action": p.action_of(m),
            "label": p.describe_move(m),
        });
        match m {
            ProductMove::Single { side, step } => {
                v[side.name()] = json!(p.graph(*side).edge_name(step.edge));
            }
            ProductMove::Joint { left, right } => {
                v["left"] = json!(p.left.edge_name(left.edge));
                v["right"] = json!(p.right.edge_name(right.edge));
            }
        }
        v
    }

    fn product_view(&self) -> OpResult {
        let lp = self.product()?;
        let p = &lp.system;
        Ok(json!({
            "configuration": product_configuration_json(p, &lp.current),
            "moves": p
                .enabled(&lp.current)
                .iter()
                .enumerate()
                .map(|(i, m)| Self::product_move_json(p, i, m))
                .collect::<Vec<_>>(),
        }))
    }

    fn product_load(&mut self, payload: &Value) -> OpResult {
        let left =
            parse_model(required_str(payload, "left")?).map_err(|d| parse_error("`left`", d))?;
        let right =
            parse_model(required_str(payload, "right")?).map_err(|d| parse_error("`right`", d))?;
        let spec = match str_field(payload, "intrusions")? {
            None => IntrusionSpec::empty(),
            Some(src) => {
                let raw = parse_intrusions(src).map_err(|d| parse_error("`intrusions`", d))?;
                IntrusionSpec::resolve(&raw, &left, &right).map_err(|errs| {
                    let msgs: Vec<String> = errs.iter().map(ToString::to_string).collect();
                    ProtocolError::new("ProductError", msgs.join("; "))
                })?
            }
        };
        let system = ProductSystem::new(left, right, spec, mode_of(payload)?)
            .map_err(|e| ProtocolError::new("ProductError", e.to_string()))?;
        self.product = Some(LoadedProduct {
            current: system.initial(),
            system,
        });
        self.product_view()
    }

    fn product_enabled(&self) -> OpResult {
        self.product_view()
    }

    /// Picks a move by `index`, or by the `left`/`right` edge ids it fires.
    fn product_step(&mut self, payload: &Value) -> OpResult {
        let lp = self.product()?;
        let p = &lp.system;
        let moves = p.enabled(&lp.current);
        let chosen = match payload.get("index") {
            Some(i) => {
                let i = i.as_u64().ok_or_else(|| {
                    ProtocolError::new("InvalidPayload", "`index` must be a non-negative integer")
                })?;
                moves.get(i as usize).copied().ok_or_else(|| {
                    ProtocolError::new("EdgeNotEnabled", format!("no enabled move with index {i}"))
                })?
            }
            None => {
                let left = str_field(payload, "left")?;
                let right = str_field(payload, "right")?;
                if left.is_none() && right.is_none() {
                    return Err(ProtocolError::new(
                        "InvalidPayload",
                        "expected `index` or at least one of `left`, `right`",
                    ));
                }
                let fires = |m: &ProductMove| {
                    let (l, r) = match m {
                        ProductMove::Single { side, step } => match side {
                            crate::products::Side::Left => {
                                (Some(p.left.edge_name(step.edge)), None)
                            }
                            crate::products::Side::Right => {
                                (None, Some(p.right.edge_name(step.edge)))
                            }
                        },
                        ProductMove::Joint { left, right } => (
                            Some(p.left.edge_name(left.edge)),
                            Some(p.right.edge_name(right.edge)),
                        ),
                    };
                    l == left && r == right
                };
                moves.iter().copied().find(fires).ok_or_else(|| {
                    ProtocolError::new(
                        "EdgeNotEnabled",
                        "no enabled product move fires the given edges",
                    )
                })?
            }
        };
        let st = p
            .step(&lp.current, &chosen)
            .map_err(|e| ProtocolError::new("ProductError", e.to_string()))?;
        let change = |g: &ValidatedGraph, c: &SideChange| {
            json!({
                "fired": c.fired.map(|e| g.edge_name(e)),
                "activated": names(g, &c.activated),
                "deactivated": names(g, &c.deactivated),
                "conflicts": names(g, &c.conflicts),
            })
        };
        let effect = json!({
            "label": p.describe_move(&chosen),
            "left": change(&p.left, &st.left),
            "right": change(&p.right, &st.right),
        });
        self.product.as_mut().unwrap().current = st.next;
        let mut out = self.product_view()?;
        out["effect"] = effect;
        Ok(out)
    }

    /// Renders `target` (model, input, lts, product-lts) in `format` (json,
    /// mermaid, dot). Model diagrams take a `view` of global or local.
    fn export(&mut self, payload: &Value) -> OpResult {
        let format = format_of(payload)?;
        let target = str_field(payload, "target")?.unwrap_or("model");
        let text = match target {
            "model" | "input" => {
                let m = self.loaded()?;
                let g = &m.input.primary;
                match format {
                    None if target == "input" => {
                        return Ok(json!({
                            "primary": model_json(g.model()),
                            "comparand": m.input.comparand.as_ref().map(|c| model_json(c.model())),
                        }))
                    }
                    None => return Ok(model_json(g.model())),
                    Some(f) => {
                        let view = match str_field(payload, "view")?.unwrap_or("global") {
                            "global" => View::GlobalAt(&m.current),
                            "local" => View::Local(&m.current),
                            other => {
                                return Err(ProtocolError::new(
                                    "InvalidPayload",
                                    format!("unknown view `{other}`, expected global or local"),
                                ))
                            }
                        };
                        to_diagram(g, view, f)
                    }
                }
            }
            "lts" => {
                let m = self.lts(payload)?;
                let (g, lts) = (&m.input.primary, m.lts.as_ref().unwrap());
                match format {
                    None => return Ok(lts_json(g, lts)),
                    Some(f) => lts_diagram(g, lts, f),
                }
            }
            "product-lts" => {
                let bound = max_states(payload)?;
                let p = &self.product()?.system;
                let lts = p.expand(Some(bound));
                match format {
                    None => return Ok(product_lts_json(p, &lts)),
                    Some(f) => product_lts_diagram(p, &lts, f),
                }
            }
            other => {
                return Err(ProtocolError::new(
                    "InvalidPayload",
                    format!("unknown export target `{other}`"),
                ))
            }
        };
        Ok(json!({"text": text}))
    }
}
