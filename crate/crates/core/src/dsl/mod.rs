//! Textual notation for reactive graphs.
//!
//! ```text
//! input     := model ( "~" model )?
//! model     := "rg" IDENT "{" decl* "}"
//! decl      := "init" IDENT ";"
//!            | IDENT ":" IDENT "-->" IDENT "by" STRING ";"
//!            | IDENT ":" IDENT ("enables"|"disables") IDENT ";"
//!            | "inactive" IDENT ("," IDENT)* ";"
//! ```
//!
//! States and actions are declared by use. Every edge is initially active
//! unless listed in an `inactive` clause. `//` starts a line comment.
//! The words `rg`, `init`, `by`, `enables`, `disables` and `inactive` are
//! reserved.
//!
//! Intrusion files (`.ri`) use the same lexer:
//!
//! ```text
//! intrusions := ( side "." IDENT ("enables"|"disables") side "." IDENT ";" )*
//! side       := "left" | "right"
//! ```

mod lexer;
mod parser;
mod pretty;

use std::fmt;

use crate::model::{ModelError, ValidatedGraph};

pub use parser::{parse, parse_intrusions, parse_model, RawIntrusion};
pub use pretty::{is_identifier, pretty, pretty_input};

/// One-based position and extent (in characters) of a piece of source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl SourceSpan {
    pub fn new(line: usize, column: usize, length: usize) -> Self {
        debug_assert!(line >= 1 && column >= 1);
        SourceSpan {
            line,
            column,
            length,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiagnosticKind {
    Syntax,
    UnknownIdentifier,
    DuplicateEdgeId,
    MissingInit,
    DuplicateInit,
    /// A well-formedness violation found after name resolution.
    Model(ModelError),
}

impl DiagnosticKind {
    pub fn code(&self) -> &'static str {
        match self {
            DiagnosticKind::Syntax => "SyntaxError",
            DiagnosticKind::UnknownIdentifier => "UnknownIdentifier",
            DiagnosticKind::DuplicateEdgeId => "DuplicateEdgeId",
            DiagnosticKind::MissingInit => "MissingInit",
            DiagnosticKind::DuplicateInit => "DuplicateInit",
            DiagnosticKind::Model(e) => match e {
                ModelError::NoStates => "NoStates",
                ModelError::UnknownInitState(_) => "UnknownInitState",
                ModelError::DanglingEdgeRef { .. } => "DanglingEdgeRef",
                ModelError::DuplicateDetail { .. } => "DuplicateDetail",
                ModelError::ActiveNotSubset(_) => "ActiveNotSubset",
                ModelError::UnknownState { .. } => "UnknownState",
                ModelError::UnknownAction { .. } => "UnknownAction",
            },
        }
    }
}

/// A parse or validation problem anchored to the source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub message: String,
    pub span: SourceSpan,
}

impl Diagnostic {
    pub fn new(kind: DiagnosticKind, message: impl Into<String>, span: SourceSpan) -> Self {
        Diagnostic {
            kind,
            message: message.into(),
            span,
        }
    }

    /// Compiler-style rendering with the offending line and a caret marker.
    pub fn render(&self, file: &str, source: &str) -> String {
        let mut out = format!(
            "{file}:{}:{}: error[{}]: {}",
            self.span.line,
            self.span.column,
            self.kind.code(),
            self.message
        );
        if let Some(text) = source.lines().nth(self.span.line - 1) {
            let gutter = self.span.line.to_string();
            let pad = " ".repeat(gutter.len());
            let marker = " ".repeat(self.span.column - 1) + &"^".repeat(self.span.length.max(1));
            out.push_str(&format!("\n{pad} |\n{gutter} | {text}\n{pad} | {marker}"));
        }
        out
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.span, self.kind.code(), self.message)
    }
}

/// A parsed program: one graph, or two graphs separated by `~`.
#[derive(Clone, Debug)]
pub struct ParsedInput {
    pub primary: ValidatedGraph,
    pub comparand: Option<ValidatedGraph>,
}
