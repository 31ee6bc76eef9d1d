use super::{Diagnostic, DiagnosticKind, SourceSpan};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    LBrace,
    RBrace,
    Semi,
    Colon,
    Comma,
    Dot,
    Tilde,
    Arrow,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Arrow => "`-->`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub(crate) fn is_ident_start(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

pub(crate) fn is_ident_continue(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    rest: &'a str,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn starts_with(&self, s: &str) -> bool {
        self.rest.starts_with(s)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        self.rest = &self.rest[c.len_utf8()..];
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }
}

/// Splits `src` into tokens. Lexical errors are reported and skipped.
pub(crate) fn lex(src: &str) -> (Vec<Token>, Vec<Diagnostic>) {
    let mut cur = Cursor {
        chars: src.chars().peekable(),
        rest: src,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    let mut diags = Vec::new();
    // Position just past the last significant character, for the EOF token.
    let mut end = SourceSpan::new(1, 1, 0);

    while let Some(c) = cur.peek() {
        let (line, column) = (cur.line, cur.column);
        let single = |tok| Token {
            tok,
            span: SourceSpan::new(line, column, 1),
        };
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if cur.starts_with("//") {
            while cur.peek().is_some_and(|c| c != '\n') {
                cur.bump();
            }
            continue;
        }
        let token = if cur.starts_with("-->") {
            for _ in 0..3 {
                cur.bump();
            }
            Some(Token {
                tok: Tok::Arrow,
                span: SourceSpan::new(line, column, 3),
            })
        } else if is_ident_start(c) {
            let mut ident = String::new();
            while let Some(c) = cur.peek() {
                if !is_ident_continue(c) || (c == '-' && cur.starts_with("-->")) {
                    break;
                }
                ident.push(c);
                cur.bump();
            }
            let len = ident.chars().count();
            Some(Token {
                tok: Tok::Ident(ident),
                span: SourceSpan::new(line, column, len),
            })
        } else if c == '"' {
            cur.bump();
            let mut value = String::new();
            let mut len = 1;
            let mut closed = false;
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
                len += 1;
                match c {
                    '"' => {
                        closed = true;
                        break;
                    }
                    '\\' => {
                        let escaped = cur.peek().filter(|c| *c != '\n');
                        match escaped {
                            Some(e @ ('"' | '\\')) => value.push(e),
                            Some('n') => value.push('\n'),
                            Some('t') => value.push('\t'),
                            Some(other) => diags.push(Diagnostic::new(
                                DiagnosticKind::Syntax,
                                format!("unknown escape `\\{other}`"),
                                SourceSpan::new(cur.line, cur.column - 1, 2),
                            )),
                            None => continue,
                        }
                        cur.bump();
                        len += 1;
                    }
                    c => value.push(c),
                }
            }
            if closed {
                Some(Token {
                    tok: Tok::Str(value),
                    span: SourceSpan::new(line, column, len),
                })
            } else {
                diags.push(Diagnostic::new(
                    DiagnosticKind::Syntax,
                    "unterminated string literal",
                    SourceSpan::new(line, column, len),
                ));
                None
            }
        } else {
            let tok = match c {
                '{' => Some(Tok::LBrace),
                '}' => Some(Tok::RBrace),
                ';' => Some(Tok::Semi),
                ':' => Some(Tok::Colon),
                ',' => Some(Tok::Comma),
                '.' => Some(Tok::Dot),
                '~' => Some(Tok::Tilde),
                _ => None,
            };
            cur.bump();
            match tok {
                Some(t) => Some(single(t)),
                None => {
                    diags.push(Diagnostic::new(
                        DiagnosticKind::Syntax,
                        format!("unexpected character `{c}`"),
                        SourceSpan::new(line, column, 1),
                    ));
                    None
                }
            }
        };
        if let Some(t) = token {
            end = SourceSpan::new(t.span.line, t.span.column + t.span.length, 0);
            tokens.push(t);
        }
    }
    tokens.push(Token {
        tok: Tok::Eof,
        span: end,
    });
    (tokens, diags)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        let (t, d) = lex(src);
        assert!(d.is_empty(), "{d:?}");
        t.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn hyphenated_names_and_arrows() {
        assert_eq!(
            toks("routed-safe-->sent"),
            [
                Tok::Ident("routed-safe".into()),
                Tok::Arrow,
                Tok::Ident("sent".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn strings_and_escapes() {
        assert_eq!(
            toks(r#""a\"b" // trailing"#),
            [Tok::Str("a\"b".into()), Tok::Eof]
        );
    }

    #[test]
    fn spans_are_one_based_chars() {
        let (t, _) = lex("rg X {\n  é1: A");
        assert_eq!(t[3].span, SourceSpan::new(2, 3, 2));
        assert_eq!(t[4].span, SourceSpan::new(2, 5, 1));
        assert_eq!(t.last().unwrap().span, SourceSpan::new(2, 8, 0));
    }

    #[test]
    fn bad_characters_are_reported() {
        let (t, d) = lex("a $ \"open");
        assert_eq!(t.len(), 2);
        assert_eq!(d.len(), 2);
        assert_eq!(d[0].span, SourceSpan::new(1, 3, 1));
        assert_eq!(d[1].message, "unterminated string literal");
    }
}
