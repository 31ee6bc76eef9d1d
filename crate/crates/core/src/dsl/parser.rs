use std::collections::BTreeMap;

use super::lexer::{lex, Tok, Token};
use super::{Diagnostic, DiagnosticKind, ParsedInput, SourceSpan};
use crate::model::{validate, ModelError, Polarity, ReactiveGraph, ValidatedGraph};
use crate::products::Side;

const RESERVED: &[&str] = &["rg", "init", "by", "enables", "disables", "inactive"];

type Name = (String, SourceSpan);

enum DeclBody {
    Ground {
        source: Name,
        target: Name,
        action: String,
    },
    Hyper {
        source: Name,
        target: Name,
        polarity: Polarity,
    },
}

struct EdgeDecl {
    id: Name,
    body: DeclBody,
}

struct ModelAst {
    name: Name,
    inits: Vec<Name>,
    edges: Vec<EdgeDecl>,
    inactive: Vec<Name>,
}

/// One intrusive pair as written, before it is resolved against the graphs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawIntrusion {
    pub source: (Side, String),
    pub target: (Side, String),
    pub polarity: Polarity,
    pub span: SourceSpan,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
}

/// Marker for "error already reported, resynchronise".
struct Bail;

impl Parser {
    fn new(src: &str) -> Self {
        let (tokens, diags) = lex(src);
        Parser {
            tokens,
            pos: 0,
            diags,
        }
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn error(&mut self, span: SourceSpan, message: String) -> Bail {
        self.diags
            .push(Diagnostic::new(DiagnosticKind::Syntax, message, span));
        Bail
    }

    fn unexpected(&mut self, what: &str) -> Bail {
        let t = self.peek().clone();
        self.error(
            t.span,
            format!("expected {what}, found {}", t.tok.describe()),
        )
    }

    fn expect(&mut self, tok: Tok) -> Result<SourceSpan, Bail> {
        if self.peek().tok == tok {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<SourceSpan, Bail> {
        if self.is_keyword(kw) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&format!("`{kw}`")))
        }
    }

    fn ident(&mut self) -> Result<Name, Bail> {
        match self.peek().tok.clone() {
            Tok::Ident(s) if RESERVED.contains(&s.as_str()) => {
                let span = self.peek().span;
                Err(self.error(span, format!("`{s}` is a reserved word")))
            }
            Tok::Ident(s) => Ok((s, self.bump().span)),
            _ => Err(self.unexpected("an identifier")),
        }
    }

    fn string(&mut self) -> Result<String, Bail> {
        match self.peek().tok.clone() {
            Tok::Str(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected("a string literal")),
        }
    }

    /// Skips past the next `;`, or up to (not including) a `}` or the end.
    fn recover(&mut self) {
        loop {
            match self.peek().tok {
                Tok::Semi => {
                    self.bump();
                    return;
                }
                Tok::RBrace | Tok::Eof => return,
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn model(&mut self) -> Result<ModelAst, Bail> {
        self.keyword("rg")?;
        let name = self.ident()?;
        self.expect(Tok::LBrace)?;
        let mut ast = ModelAst {
            name,
            inits: Vec::new(),
            edges: Vec::new(),
            inactive: Vec::new(),
        };
        loop {
            match self.peek().tok {
                Tok::RBrace => {
                    self.bump();
                    return Ok(ast);
                }
                Tok::Eof => return Err(self.unexpected("`}`")),
                _ => {
                    if self.decl(&mut ast).is_err() {
                        self.recover();
                    }
                }
            }
        }
    }

    fn decl(&mut self, ast: &mut ModelAst) -> Result<(), Bail> {
        if self.is_keyword("init") && *self.peek_at(1) != Tok::Colon {
            self.bump();
            let state = self.ident()?;
            self.expect(Tok::Semi)?;
            ast.inits.push(state);
            return Ok(());
        }
        if self.is_keyword("inactive") && *self.peek_at(1) != Tok::Colon {
            self.bump();
            let mut names = vec![self.ident()?];
            while self.peek().tok == Tok::Comma {
                self.bump();
                names.push(self.ident()?);
            }
            self.expect(Tok::Semi)?;
            ast.inactive.extend(names);
            return Ok(());
        }
        let id = self.ident()?;
        self.expect(Tok::Colon)?;
        let source = self.ident()?;
        let body = match self.peek().tok.clone() {
            Tok::Arrow => {
                self.bump();
                let target = self.ident()?;
                self.keyword("by")?;
                let action = self.string()?;
                DeclBody::Ground {
                    source,
                    target,
                    action,
                }
            }
            Tok::Ident(kw) if kw == "enables" || kw == "disables" => {
                self.bump();
                let target = self.ident()?;
                let polarity = if kw == "enables" {
                    Polarity::On
                } else {
                    Polarity::Off
                };
                DeclBody::Hyper {
                    source,
                    target,
                    polarity,
                }
            }
            _ => return Err(self.unexpected("`-->`, `enables` or `disables`")),
        };
        self.expect(Tok::Semi)?;
        ast.edges.push(EdgeDecl { id, body });
        Ok(())
    }

    fn input(&mut self) -> Vec<ModelAst> {
        let mut models = Vec::new();
        match self.model() {
            Ok(m) => models.push(m),
            Err(Bail) => return models,
        }
        if self.peek().tok == Tok::Tilde {
            self.bump();
            match self.model() {
                Ok(m) => models.push(m),
                Err(Bail) => return models,
            }
        }
        if self.peek().tok != Tok::Eof {
            let _ = self.unexpected("end of input");
        }
        models
    }
}

fn resolve(ast: ModelAst, diags: &mut Vec<Diagnostic>) -> Option<ValidatedGraph> {
    let before = diags.len();
    let (name, name_span) = ast.name;
    let (init, init_span) = match ast.inits.as_slice() {
        [] => {
            diags.push(Diagnostic::new(
                DiagnosticKind::MissingInit,
                format!("graph `{name}` has no `init` declaration"),
                name_span,
            ));
            (String::new(), name_span)
        }
        [first, rest @ ..] => {
            for (_, span) in rest {
                diags.push(Diagnostic::new(
                    DiagnosticKind::DuplicateInit,
                    format!("graph `{name}` already declares `init {}`", first.0),
                    *span,
                ));
            }
            first.clone()
        }
    };

    let mut raw = ReactiveGraph::new(name, init);
    let mut spans: BTreeMap<String, SourceSpan> = BTreeMap::new();
    for decl in &ast.edges {
        let (id, span) = &decl.id;
        if spans.contains_key(id) {
            diags.push(Diagnostic::new(
                DiagnosticKind::DuplicateEdgeId,
                format!("edge `{id}` is declared more than once"),
                *span,
            ));
            continue;
        }
        spans.insert(id.clone(), *span);
    }
    let mut seen = std::collections::BTreeSet::new();
    for decl in &ast.edges {
        let id = &decl.id.0;
        if !seen.insert(id.clone()) {
            continue;
        }
        match &decl.body {
            DeclBody::Ground {
                source,
                target,
                action,
            } => {
                raw = raw.ground(id, &source.0, action, &target.0);
            }
            DeclBody::Hyper {
                source,
                target,
                polarity,
            } => {
                for (r, span) in [source, target] {
                    if !spans.contains_key(r) {
                        diags.push(Diagnostic::new(
                            DiagnosticKind::UnknownIdentifier,
                            format!("unknown edge `{r}`"),
                            *span,
                        ));
                    }
                }
                raw = raw.hyper(id, &source.0, *polarity, &target.0);
            }
        }
    }
    for (id, span) in &ast.inactive {
        if spans.contains_key(id) {
            raw.active.remove(id);
        } else {
            diags.push(Diagnostic::new(
                DiagnosticKind::UnknownIdentifier,
                format!("unknown edge `{id}`"),
                *span,
            ));
        }
    }
    if diags.len() > before {
        return None;
    }
    match validate(&raw) {
        Ok(g) => Some(g),
        Err(errors) => {
            for e in errors {
                let span = match &e {
                    ModelError::UnknownInitState(_) | ModelError::NoStates => init_span,
                    other => other
                        .culprit_edge()
                        .and_then(|id| spans.get(id).copied())
                        .unwrap_or(name_span),
                };
                diags.push(Diagnostic::new(
                    DiagnosticKind::Model(e.clone()),
                    e.to_string(),
                    span,
                ));
            }
            None
        }
    }
}

/// Parses a program of one graph, or two graphs separated by `~`.
pub fn parse(src: &str) -> Result<ParsedInput, Vec<Diagnostic>> {
    let mut p = Parser::new(src);
    let models = p.input();
    let mut diags = p.diags;
    let mut graphs: Vec<ValidatedGraph> = models
        .into_iter()
        .filter_map(|m| resolve(m, &mut diags))
        .collect();
    if !diags.is_empty() {
        diags.sort_by_key(|d| d.span);
        return Err(diags);
    }
    let comparand = if graphs.len() == 2 {
        graphs.pop()
    } else {
        None
    };
    let primary = graphs.pop().expect("a successful parse has a model");
    Ok(ParsedInput { primary, comparand })
}

/// Parses a program that must contain exactly one graph.
pub fn parse_model(src: &str) -> Result<ValidatedGraph, Vec<Diagnostic>> {
    let input = parse(src)?;
    match input.comparand {
        None => Ok(input.primary),
        Some(_) => {
            let span = src
                .lines()
                .enumerate()
                .find_map(|(i, l)| l.find('~').map(|c| (i, l[..c].chars().count())))
                .map(|(i, c)| SourceSpan::new(i + 1, c + 1, 1))
                .unwrap_or(SourceSpan::new(1, 1, 0));
            Err(vec![Diagnostic::new(
                DiagnosticKind::Syntax,
                "expected a single graph, found two separated by `~`",
                span,
            )])
        }
    }
}

/// Parses an intrusion file.
pub fn parse_intrusions(src: &str) -> Result<Vec<RawIntrusion>, Vec<Diagnostic>> {
    let mut p = Parser::new(src);
    let mut out = Vec::new();
    while p.peek().tok != Tok::Eof {
        let start = p.peek().span;
        match intrusion(&mut p) {
            Ok((source, polarity, target)) => out.push(RawIntrusion {
                source,
                target,
                polarity,
                span: start,
            }),
            Err(Bail) => {
                p.recover();
                if p.peek().tok == Tok::RBrace {
                    let _ = p.unexpected("an intrusion");
                    p.bump();
                }
            }
        }
    }
    if p.diags.is_empty() {
        Ok(out)
    } else {
        p.diags.sort_by_key(|d| d.span);
        Err(p.diags)
    }
}

fn side(p: &mut Parser) -> Result<Side, Bail> {
    let side = match &p.peek().tok {
        Tok::Ident(s) if s == "left" => Side::Left,
        Tok::Ident(s) if s == "right" => Side::Right,
        _ => return Err(p.unexpected("`left` or `right`")),
    };
    p.bump();
    Ok(side)
}

fn qualified(p: &mut Parser) -> Result<(Side, String), Bail> {
    let s = side(p)?;
    p.expect(Tok::Dot)?;
    Ok((s, p.ident()?.0))
}

type SideEdgeName = (Side, String);

fn intrusion(p: &mut Parser) -> Result<(SideEdgeName, Polarity, SideEdgeName), Bail> {
    let source = qualified(p)?;
    let polarity = if p.is_keyword("enables") {
        Polarity::On
    } else if p.is_keyword("disables") {
        Polarity::Off
    } else {
        return Err(p.unexpected("`enables` or `disables`"));
    };
    p.bump();
    let target = qualified(p)?;
    p.expect(Tok::Semi)?;
    Ok((source, polarity, target))
}
