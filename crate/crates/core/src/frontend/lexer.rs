use super::{Diagnostic, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokKind {
    Ident(String),
    Int(u64),
    /// One of `( ) [ ] , ; : = ! & | -> -`.
    Sym(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokKind,
    pub span: Span,
}

const SYMBOLS: [&str; 12] = ["->", "(", ")", "[", "]", ",", ";", ":", "=", "!", "&", "|"];

/// Splits `text` into tokens; `--` starts a comment running to end of line.
pub fn lex(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let mut chars = line.char_indices().peekable();
        while let Some(&(i, c)) = chars.peek() {
            let col = line[..i].chars().count() + 1;
            let rest = &line[i..];
            if c.is_whitespace() {
                chars.next();
            } else if rest.starts_with("--") {
                break;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let len = rest
                    .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                    .unwrap_or(rest.len());
                out.push(Token {
                    kind: TokKind::Ident(rest[..len].to_string()),
                    span: Span::new(line_no, col, line_no, col + len),
                });
                for _ in 0..len {
                    chars.next();
                }
            } else if c.is_ascii_digit() {
                let len = rest.find(|ch: char| !ch.is_ascii_digit()).unwrap_or(rest.len());
                let span = Span::new(line_no, col, line_no, col + len);
                let value = rest[..len]
                    .parse()
                    .map_err(|_| Diagnostic::error(span, "integer out of range"))?;
                out.push(Token {
                    kind: TokKind::Int(value),
                    span,
                });
                for _ in 0..len {
                    chars.next();
                }
            } else {
                let sym = SYMBOLS
                    .iter()
                    .find(|s| rest.starts_with(**s))
                    .copied()
                    .or(if c == '-' { Some("-") } else { None });
                let Some(sym) = sym else {
                    return Err(Diagnostic::error(
                        Span::new(line_no, col, line_no, col + 1),
                        format!("unexpected character `{c}`"),
                    ));
                };
                out.push(Token {
                    kind: TokKind::Sym(sym),
                    span: Span::new(line_no, col, line_no, col + sym.len()),
                });
                for _ in 0..sym.len() {
                    chars.next();
                }
            }
        }
    }
    Ok(out)
}

/// Cursor over a token list with the end-of-input position for diagnostics.
pub struct Cursor {
    pub toks: Vec<Token>,
    pub pos: usize,
    pub eof: Span,
}

impl Cursor {
    pub fn new(toks: Vec<Token>, text: &str) -> Self {
        let last_line = text.lines().count().max(1);
        let last_col = text.lines().last().map_or(1, |l| l.chars().count() + 1);
        Cursor {
            toks,
            pos: 0,
            eof: Span::new(last_line, last_col, last_line, last_col),
        }
    }

    pub fn peek(&self) -> Option<&TokKind> {
        self.toks.get(self.pos).map(|t| &t.kind)
    }

    pub fn peek_at(&self, offset: usize) -> Option<&TokKind> {
        self.toks.get(self.pos + offset).map(|t| &t.kind)
    }

    pub fn span(&self) -> Span {
        self.toks.get(self.pos).map_or(self.eof, |t| t.span)
    }

    pub fn prev_span(&self) -> Span {
        self.pos
            .checked_sub(1)
            .and_then(|i| self.toks.get(i))
            .map_or(self.eof, |t| t.span)
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Some(TokKind::Sym(x)) if *x == s)
    }

    pub fn is_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Some(TokKind::Ident(x)) if x == word)
    }

    pub fn describe(&self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(TokKind::Ident(s)) => format!("`{s}`"),
            Some(TokKind::Int(n)) => format!("`{n}`"),
            Some(TokKind::Sym(s)) => format!("`{s}`"),
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<Span, Diagnostic> {
        if self.is_sym(s) {
            self.pos += 1;
            Ok(self.prev_span())
        } else {
            Err(Diagnostic::error(
                self.span(),
                format!("expected `{s}`, found {}", self.describe()),
            ))
        }
    }

    pub fn expect_ident(&mut self, what: &str) -> Result<(String, Span), Diagnostic> {
        match self.peek() {
            Some(TokKind::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok((s, self.prev_span()))
            }
            _ => Err(Diagnostic::error(
                self.span(),
                format!("expected {what}, found {}", self.describe()),
            )),
        }
    }
}
