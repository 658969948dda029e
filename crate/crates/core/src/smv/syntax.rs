//! Parser and static checks for the SMV subset the emitter produces:
//! `MODULE`, `IVAR`, `VAR` (booleans, enumerations, integer ranges, boolean
//! arrays), `ASSIGN` with `init`/`next` and `case`/`esac`, and `LTLSPEC`.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ltl::LtlFormula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct SmvSyntaxError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarType {
    Boolean,
    Enum(Vec<String>),
    Range(i64, i64),
    BoolArray(i64, i64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Bool(bool),
    Int(i64),
    /// A variable or an enumeration value.
    Ident(String),
    Elem(String, i64),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Cmp(CmpOp, Box<Expr>, Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Set(Vec<Expr>),
    Case(Vec<(Expr, Expr)>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

/// An assignment target: a scalar variable or one array cell.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Target {
    pub name: String,
    pub index: Option<i64>,
}

impl Target {
    pub fn key(&self) -> String {
        match self.index {
            Some(i) => format!("{}[{i}]", self.name),
            None => self.name.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmvModule {
    pub name: String,
    pub ivars: Vec<(String, VarType)>,
    pub vars: Vec<(String, VarType)>,
    pub inits: Vec<(Target, Expr)>,
    pub nexts: Vec<(Target, Expr)>,
    /// Specifications with atoms written as in the source (`p[1]`, `loc=s0`).
    pub ltlspecs: Vec<LtlFormula>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
}

struct Lexed {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: [&str; 22] = [
    ":=", "..", "->", "!=", "<=", ">=", ":", ";", ",", "(", ")", "[", "]", "{", "}", "=", "<", ">",
    "&", "|", "!", "+",
];

fn lex(text: &str) -> Result<Vec<Lexed>, SmvSyntaxError> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let bytes = line.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            let col = i + 1;
            let err = |message: String| SmvSyntaxError {
                line: ln + 1,
                col,
                message,
            };
            if c.is_whitespace() {
                i += 1;
            } else if line[i..].starts_with("--") {
                break;
            } else if c.is_ascii_digit() {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n = line[start..i]
                    .parse()
                    .map_err(|_| err(format!("integer `{}` out of range", &line[start..i])))?;
                out.push(Lexed {
                    tok: Tok::Int(n),
                    line: ln + 1,
                    col,
                });
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || matches!(bytes[i], b'_' | b'$' | b'#'))
                {
                    i += 1;
                }
                out.push(Lexed {
                    tok: Tok::Ident(line[start..i].to_string()),
                    line: ln + 1,
                    col,
                });
            } else if c == '-' {
                out.push(Lexed {
                    tok: Tok::Sym(if line[i..].starts_with("->") { "->" } else { "-" }),
                    line: ln + 1,
                    col,
                });
                i += if line[i..].starts_with("->") { 2 } else { 1 };
            } else if let Some(s) = SYMBOLS.iter().find(|s| line[i..].starts_with(**s)) {
                out.push(Lexed {
                    tok: Tok::Sym(s),
                    line: ln + 1,
                    col,
                });
                i += s.len();
            } else {
                return Err(err(format!("unexpected character `{c}`")));
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Lexed>,
    pos: usize,
    end: (usize, usize),
}

type PResult<T> = Result<T, SmvSyntaxError>;

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|l| &l.tok)
    }

    fn peek_ident(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(w)) if w == word)
    }

    fn peek_sym(&self, sym: &str) -> bool {
        matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym)
    }

    fn error(&self, message: impl Into<String>) -> SmvSyntaxError {
        let (line, col) = self
            .toks
            .get(self.pos)
            .map_or(self.end, |l| (l.line, l.col));
        SmvSyntaxError {
            line,
            col,
            message: message.into(),
        }
    }

    fn describe(&self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(Tok::Ident(s)) => format!("`{s}`"),
            Some(Tok::Int(n)) => format!("`{n}`"),
            Some(Tok::Sym(s)) => format!("`{s}`"),
        }
    }

    fn sym(&mut self, sym: &str) -> PResult<()> {
        if self.peek_sym(sym) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected `{sym}`, found {}", self.describe())))
        }
    }

    fn keyword(&mut self, word: &str) -> PResult<()> {
        if self.peek_ident(word) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected `{word}`, found {}", self.describe())))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) if !is_keyword(s) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(format!("expected a name, found {}", self.describe()))),
        }
    }

    fn int(&mut self) -> PResult<i64> {
        let neg = self.peek_sym("-");
        if neg {
            self.pos += 1;
        }
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(if neg { -n } else { n })
            }
            _ => Err(self.error(format!("expected an integer, found {}", self.describe()))),
        }
    }

    fn var_type(&mut self) -> PResult<VarType> {
        if self.peek_ident("boolean") {
            self.pos += 1;
            return Ok(VarType::Boolean);
        }
        if self.peek_ident("array") {
            self.pos += 1;
            let lo = self.int()?;
            self.sym("..")?;
            let hi = self.int()?;
            self.keyword("of")?;
            self.keyword("boolean")?;
            if lo > hi {
                return Err(self.error("empty array range"));
            }
            return Ok(VarType::BoolArray(lo, hi));
        }
        if self.peek_sym("{") {
            self.pos += 1;
            let mut values = vec![self.ident()?];
            while self.peek_sym(",") {
                self.pos += 1;
                values.push(self.ident()?);
            }
            self.sym("}")?;
            return Ok(VarType::Enum(values));
        }
        let lo = self.int()?;
        self.sym("..")?;
        let hi = self.int()?;
        if lo > hi {
            return Err(self.error("empty integer range"));
        }
        Ok(VarType::Range(lo, hi))
    }

    fn decls(&mut self) -> PResult<Vec<(String, VarType)>> {
        let mut out = Vec::new();
        while matches!(self.peek(), Some(Tok::Ident(s)) if !is_keyword(s)) {
            let name = self.ident()?;
            self.sym(":")?;
            let ty = self.var_type()?;
            self.sym(";")?;
            out.push((name, ty));
        }
        if out.is_empty() {
            return Err(self.error("expected a declaration"));
        }
        Ok(out)
    }

    fn target(&mut self) -> PResult<Target> {
        let name = self.ident()?;
        let index = if self.peek_sym("[") {
            self.pos += 1;
            let i = self.int()?;
            self.sym("]")?;
            Some(i)
        } else {
            None
        };
        Ok(Target { name, index })
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and_expr()?;
        while self.peek_sym("|") {
            self.pos += 1;
            lhs = Expr::Or(Box::new(lhs), Box::new(self.and_expr()?));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.cmp_expr()?;
        while self.peek_sym("&") {
            self.pos += 1;
            lhs = Expr::And(Box::new(lhs), Box::new(self.cmp_expr()?));
        }
        Ok(lhs)
    }

    fn cmp_expr(&mut self) -> PResult<Expr> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Some(Tok::Sym("=")) => CmpOp::Eq,
            Some(Tok::Sym("!=")) => CmpOp::Ne,
            Some(Tok::Sym("<")) => CmpOp::Lt,
            Some(Tok::Sym("<=")) => CmpOp::Le,
            Some(Tok::Sym(">")) => CmpOp::Gt,
            Some(Tok::Sym(">=")) => CmpOp::Ge,
            _ => return Ok(lhs),
        };
        self.pos += 1;
        Ok(Expr::Cmp(op, Box::new(lhs), Box::new(self.add_expr()?)))
    }

    fn add_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.primary()?;
        loop {
            if self.peek_sym("+") {
                self.pos += 1;
                lhs = Expr::Add(Box::new(lhs), Box::new(self.primary()?));
            } else if self.peek_sym("-") {
                self.pos += 1;
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.primary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek().cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Expr::Int(n))
            }
            Some(Tok::Ident(w)) if w == "TRUE" || w == "FALSE" => {
                self.pos += 1;
                Ok(Expr::Bool(w == "TRUE"))
            }
            Some(Tok::Ident(w)) if w == "case" => {
                self.pos += 1;
                let mut arms = Vec::new();
                while !self.peek_ident("esac") {
                    let g = self.expr()?;
                    self.sym(":")?;
                    let v = self.expr()?;
                    self.sym(";")?;
                    arms.push((g, v));
                }
                self.pos += 1;
                if arms.is_empty() {
                    return Err(self.error("empty case expression"));
                }
                Ok(Expr::Case(arms))
            }
            Some(Tok::Ident(_)) => {
                let t = self.target()?;
                Ok(match t.index {
                    Some(i) => Expr::Elem(t.name, i),
                    None => Expr::Ident(t.name),
                })
            }
            Some(Tok::Sym("!")) => {
                self.pos += 1;
                Ok(Expr::Not(Box::new(self.primary()?)))
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let e = self.expr()?;
                self.sym(")")?;
                Ok(e)
            }
            Some(Tok::Sym("{")) => {
                self.pos += 1;
                let mut items = vec![self.expr()?];
                while self.peek_sym(",") {
                    self.pos += 1;
                    items.push(self.expr()?);
                }
                self.sym("}")?;
                Ok(Expr::Set(items))
            }
            _ => Err(self.error(format!("expected an expression, found {}", self.describe()))),
        }
    }

    fn ltl(&mut self) -> PResult<LtlFormula> {
        let lhs = self.ltl_or()?;
        if self.peek_sym("->") {
            self.pos += 1;
            return Ok(lhs.implies(self.ltl()?));
        }
        Ok(lhs)
    }

    fn ltl_or(&mut self) -> PResult<LtlFormula> {
        let mut items = vec![self.ltl_and()?];
        while self.peek_sym("|") {
            self.pos += 1;
            items.push(self.ltl_and()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { LtlFormula::Or(items) })
    }

    fn ltl_and(&mut self) -> PResult<LtlFormula> {
        let mut items = vec![self.ltl_until()?];
        while self.peek_sym("&") {
            self.pos += 1;
            items.push(self.ltl_until()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { LtlFormula::And(items) })
    }

    fn ltl_until(&mut self) -> PResult<LtlFormula> {
        let lhs = self.ltl_unary()?;
        if self.peek_ident("U") {
            self.pos += 1;
            return Ok(lhs.until(self.ltl_until()?));
        }
        Ok(lhs)
    }

    fn ltl_unary(&mut self) -> PResult<LtlFormula> {
        match self.peek().cloned() {
            Some(Tok::Sym("!")) => {
                self.pos += 1;
                Ok(self.ltl_unary()?.not())
            }
            Some(Tok::Ident(w)) if matches!(w.as_str(), "G" | "F" | "X") => {
                self.pos += 1;
                let inner = self.ltl_unary()?;
                Ok(match w.as_str() {
                    "G" => inner.globally(),
                    "F" => inner.finally(),
                    _ => inner.next(),
                })
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let f = self.ltl()?;
                self.sym(")")?;
                Ok(f)
            }
            Some(Tok::Ident(w)) if w == "TRUE" || w == "FALSE" => {
                self.pos += 1;
                Ok(if w == "TRUE" { LtlFormula::True } else { LtlFormula::False })
            }
            Some(Tok::Ident(_)) => {
                let t = self.target()?;
                if self.peek_sym("=") {
                    self.pos += 1;
                    let v = match self.peek().cloned() {
                        Some(Tok::Int(n)) => {
                            self.pos += 1;
                            n.to_string()
                        }
                        Some(Tok::Ident(w)) if w == "TRUE" || w == "FALSE" => {
                            self.pos += 1;
                            w
                        }
                        _ => self.ident()?,
                    };
                    return Ok(LtlFormula::atom(format!("{}={v}", t.key())));
                }
                Ok(LtlFormula::atom(t.key()))
            }
            _ => Err(self.error(format!("expected a formula, found {}", self.describe()))),
        }
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(
        s,
        "MODULE" | "IVAR" | "VAR" | "ASSIGN" | "LTLSPEC" | "init" | "next" | "case" | "esac"
            | "array" | "of" | "boolean" | "TRUE" | "FALSE" | "G" | "F" | "X" | "U"
    )
}

/// Parses a module of the supported subset and runs the static checks of
/// [`SmvModule::validate`].
pub fn parse_smv(text: &str) -> Result<SmvModule, SmvSyntaxError> {
    let toks = lex(text)?;
    let end = (text.lines().count().max(1), 1);
    let mut p = Parser { toks, pos: 0, end };
    p.keyword("MODULE")?;
    let name = p.ident()?;
    let mut m = SmvModule {
        name,
        ivars: Vec::new(),
        vars: Vec::new(),
        inits: Vec::new(),
        nexts: Vec::new(),
        ltlspecs: Vec::new(),
    };
    while p.peek().is_some() {
        if p.peek_ident("IVAR") {
            p.pos += 1;
            m.ivars.extend(p.decls()?);
        } else if p.peek_ident("VAR") {
            p.pos += 1;
            m.vars.extend(p.decls()?);
        } else if p.peek_ident("ASSIGN") {
            p.pos += 1;
            while p.peek_ident("init") || p.peek_ident("next") {
                let is_init = p.peek_ident("init");
                p.pos += 1;
                p.sym("(")?;
                let t = p.target()?;
                p.sym(")")?;
                p.sym(":=")?;
                let e = p.expr()?;
                p.sym(";")?;
                if is_init {
                    m.inits.push((t, e));
                } else {
                    m.nexts.push((t, e));
                }
            }
        } else if p.peek_ident("LTLSPEC") {
            p.pos += 1;
            m.ltlspecs.push(p.ltl()?);
            if p.peek_sym(";") {
                p.pos += 1;
            }
        } else {
            return Err(p.error(format!("expected a section keyword, found {}", p.describe())));
        }
    }
    m.validate().map_err(|message| SmvSyntaxError {
        line: 0,
        col: 0,
        message,
    })?;
    Ok(m)
}

/// Syntax check only.
pub fn check_syntax(text: &str) -> Result<(), SmvSyntaxError> {
    parse_smv(text).map(|_| ())
}

impl SmvModule {
    pub fn var_type(&self, name: &str) -> Option<&VarType> {
        self.ivars
            .iter()
            .chain(&self.vars)
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }

    pub fn enum_values(&self) -> BTreeSet<&str> {
        self.ivars
            .iter()
            .chain(&self.vars)
            .filter_map(|(_, t)| match t {
                VarType::Enum(v) => Some(v.iter().map(String::as_str)),
                _ => None,
            })
            .flatten()
            .collect()
    }

    /// Names of all state cells: scalar variables and every array element.
    pub fn cells(&self) -> Vec<(String, VarType)> {
        let mut out = Vec::new();
        for (name, ty) in &self.vars {
            match ty {
                VarType::BoolArray(lo, hi) => {
                    for i in *lo..=*hi {
                        out.push((format!("{name}[{i}]"), VarType::Boolean));
                    }
                }
                _ => out.push((name.clone(), ty.clone())),
            }
        }
        out
    }

    fn check_target(&self, t: &Target) -> Result<(), String> {
        match (self.vars.iter().find(|(n, _)| *n == t.name), t.index) {
            (None, _) if self.ivars.iter().any(|(n, _)| *n == t.name) => {
                Err(format!("input variable `{}` cannot be assigned", t.name))
            }
            (None, _) => Err(format!("assignment to undeclared `{}`", t.name)),
            (Some((_, VarType::BoolArray(lo, hi))), Some(i)) if i < *lo || i > *hi => {
                Err(format!("index {i} of `{}` outside {lo}..{hi}", t.name))
            }
            (Some((_, VarType::BoolArray(..))), None) => {
                Err(format!("array `{}` assigned without index", t.name))
            }
            (Some((_, ty)), Some(_)) if !matches!(ty, VarType::BoolArray(..)) => {
                Err(format!("`{}` is not an array", t.name))
            }
            _ => Ok(()),
        }
    }

    fn check_expr(&self, e: &Expr) -> Result<(), String> {
        match e {
            Expr::Bool(_) | Expr::Int(_) => Ok(()),
            Expr::Ident(n) => {
                match self.var_type(n) {
                    Some(VarType::BoolArray(..)) => Err(format!("array `{n}` used without index")),
                    Some(_) => Ok(()),
                    None if self.enum_values().contains(n.as_str()) => Ok(()),
                    None => Err(format!("undeclared identifier `{n}`")),
                }
            }
            Expr::Elem(n, i) => self.check_target(&Target {
                name: n.clone(),
                index: Some(*i),
            }),
            Expr::Not(a) => self.check_expr(a),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Add(a, b) | Expr::Sub(a, b) => {
                self.check_expr(a)?;
                self.check_expr(b)
            }
            Expr::Cmp(_, a, b) => {
                self.check_expr(a)?;
                self.check_expr(b)
            }
            Expr::Set(items) => items.iter().try_for_each(|x| self.check_expr(x)),
            Expr::Case(arms) => arms.iter().try_for_each(|(g, v)| {
                self.check_expr(g)?;
                self.check_expr(v)
            }),
        }
    }

    fn check_atom(&self, atom: &str) -> Result<(), String> {
        let (lhs, rhs) = match atom.split_once('=') {
            Some((l, r)) => (l, Some(r)),
            None => (atom, None),
        };
        let target = match lhs.split_once('[') {
            Some((n, rest)) => Target {
                name: n.to_string(),
                index: Some(
                    rest.trim_end_matches(']')
                        .parse()
                        .map_err(|_| format!("bad index in `{atom}`"))?,
                ),
            },
            None => Target {
                name: lhs.to_string(),
                index: None,
            },
        };
        if target.index.is_some() {
            self.check_target(&target)?;
        } else if self.var_type(lhs).is_none() {
            return Err(format!("specification mentions undeclared `{lhs}`"));
        }
        match (rhs, self.var_type(&target.name)) {
            (Some(v), Some(VarType::Enum(vals))) if !vals.iter().any(|x| x == v) => {
                Err(format!("`{v}` is not a value of `{}`", target.name))
            }
            _ => Ok(()),
        }
    }

    /// Declarations are unique, assignments target declared state variables
    /// (at most one `init` and one `next` each), indices stay within array
    /// bounds, and every identifier is declared.
    pub fn validate(&self) -> Result<(), String> {
        let mut names = BTreeSet::new();
        for (n, _) in self.ivars.iter().chain(&self.vars) {
            if !names.insert(n) {
                return Err(format!("`{n}` declared twice"));
            }
        }
        for (kind, list) in [("init", &self.inits), ("next", &self.nexts)] {
            let mut seen = BTreeMap::new();
            for (t, e) in list.iter() {
                self.check_target(t)?;
                self.check_expr(e)?;
                if seen.insert(t.key(), ()).is_some() {
                    return Err(format!("`{kind}({})` assigned twice", t.key()));
                }
            }
        }
        for spec in &self.ltlspecs {
            for atom in spec.atoms() {
                self.check_atom(atom)?;
            }
        }
        Ok(())
    }
}
