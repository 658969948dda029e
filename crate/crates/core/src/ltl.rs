//! Propositional LTL over named atoms: the target of grounding and the input
//! of the checker.
//!
//! The canonical text form (used verbatim in emitted SMV) parenthesizes every
//! non-atomic operand of a binary operator and every operand of a unary one;
//! `&`/`|` chains are rendered flat.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LtlFormula {
    True,
    False,
    Atom(String),
    Not(Box<LtlFormula>),
    And(Vec<LtlFormula>),
    Or(Vec<LtlFormula>),
    Implies(Box<LtlFormula>, Box<LtlFormula>),
    Next(Box<LtlFormula>),
    Until(Box<LtlFormula>, Box<LtlFormula>),
    Finally(Box<LtlFormula>),
    Globally(Box<LtlFormula>),
}

impl LtlFormula {
    pub fn atom(name: impl Into<String>) -> Self {
        LtlFormula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        LtlFormula::Not(Box::new(self))
    }

    pub fn implies(self, rhs: Self) -> Self {
        LtlFormula::Implies(Box::new(self), Box::new(rhs))
    }

    pub fn next(self) -> Self {
        LtlFormula::Next(Box::new(self))
    }

    pub fn until(self, rhs: Self) -> Self {
        LtlFormula::Until(Box::new(self), Box::new(rhs))
    }

    pub fn finally(self) -> Self {
        LtlFormula::Finally(Box::new(self))
    }

    pub fn globally(self) -> Self {
        LtlFormula::Globally(Box::new(self))
    }

    /// Disjunction with constant folding and flattening of nested `|`.
    pub fn any_of(items: impl IntoIterator<Item = LtlFormula>) -> Self {
        let mut out = Vec::new();
        for f in items {
            match f {
                LtlFormula::True => return LtlFormula::True,
                LtlFormula::False => {}
                LtlFormula::Or(inner) => out.extend(inner),
                f => out.push(f),
            }
        }
        match out.len() {
            0 => LtlFormula::False,
            1 => out.pop().unwrap(),
            _ => LtlFormula::Or(out),
        }
    }

    /// Conjunction with constant folding and flattening of nested `&`.
    pub fn all_of(items: impl IntoIterator<Item = LtlFormula>) -> Self {
        let mut out = Vec::new();
        for f in items {
            match f {
                LtlFormula::False => return LtlFormula::False,
                LtlFormula::True => {}
                LtlFormula::And(inner) => out.extend(inner),
                f => out.push(f),
            }
        }
        match out.len() {
            0 => LtlFormula::True,
            1 => out.pop().unwrap(),
            _ => LtlFormula::And(out),
        }
    }

    /// Negation with constant folding.
    pub fn negate(f: LtlFormula) -> Self {
        match f {
            LtlFormula::True => LtlFormula::False,
            LtlFormula::False => LtlFormula::True,
            LtlFormula::Not(inner) => *inner,
            f => f.not(),
        }
    }

    /// Implication with constant folding.
    pub fn imply(lhs: LtlFormula, rhs: LtlFormula) -> Self {
        match (lhs, rhs) {
            (LtlFormula::False, _) | (_, LtlFormula::True) => LtlFormula::True,
            (LtlFormula::True, r) => r,
            (l, LtlFormula::False) => Self::negate(l),
            (l, r) => l.implies(r),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, LtlFormula::True | LtlFormula::False)
    }

    pub fn is_propositional(&self) -> bool {
        match self {
            LtlFormula::True | LtlFormula::False | LtlFormula::Atom(_) => true,
            LtlFormula::Not(a) => a.is_propositional(),
            LtlFormula::And(v) | LtlFormula::Or(v) => v.iter().all(Self::is_propositional),
            LtlFormula::Implies(a, b) => a.is_propositional() && b.is_propositional(),
            _ => false,
        }
    }

    pub fn atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            LtlFormula::True | LtlFormula::False => {}
            LtlFormula::Atom(a) => {
                out.insert(a);
            }
            LtlFormula::Not(a)
            | LtlFormula::Next(a)
            | LtlFormula::Finally(a)
            | LtlFormula::Globally(a) => a.collect_atoms(out),
            LtlFormula::And(v) | LtlFormula::Or(v) => v.iter().for_each(|f| f.collect_atoms(out)),
            LtlFormula::Implies(a, b) | LtlFormula::Until(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Number of syntax nodes.
    pub fn size(&self) -> usize {
        match self {
            LtlFormula::True | LtlFormula::False | LtlFormula::Atom(_) => 1,
            LtlFormula::Not(a)
            | LtlFormula::Next(a)
            | LtlFormula::Finally(a)
            | LtlFormula::Globally(a) => 1 + a.size(),
            LtlFormula::And(v) | LtlFormula::Or(v) => 1 + v.iter().map(Self::size).sum::<usize>(),
            LtlFormula::Implies(a, b) | LtlFormula::Until(a, b) => 1 + a.size() + b.size(),
        }
    }

    /// Truth of a propositional formula under `holds`.
    pub fn eval_prop(&self, holds: &dyn Fn(&str) -> bool) -> Option<bool> {
        Some(match self {
            LtlFormula::True => true,
            LtlFormula::False => false,
            LtlFormula::Atom(a) => holds(a),
            LtlFormula::Not(a) => !a.eval_prop(holds)?,
            LtlFormula::And(v) => {
                let mut all = true;
                for f in v {
                    all &= f.eval_prop(holds)?;
                }
                all
            }
            LtlFormula::Or(v) => {
                let mut any = false;
                for f in v {
                    any |= f.eval_prop(holds)?;
                }
                any
            }
            LtlFormula::Implies(a, b) => !a.eval_prop(holds)? || b.eval_prop(holds)?,
            _ => return None,
        })
    }

    /// Canonical text; see the module docs.
    pub fn render(&self) -> String {
        self.to_string()
    }

    pub fn parse(text: &str) -> Result<LtlFormula, LtlParseError> {
        let tokens = lex(text)?;
        let mut p = Parser { tokens, pos: 0 };
        let f = p.implication()?;
        if p.pos != p.tokens.len() {
            return Err(LtlParseError(format!(
                "unexpected `{}` after formula",
                p.tokens[p.pos]
            )));
        }
        Ok(f)
    }

    fn is_atomic(&self) -> bool {
        matches!(
            self,
            LtlFormula::True | LtlFormula::False | LtlFormula::Atom(_)
        )
    }
}

impl fmt::Display for LtlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn operand(f: &mut fmt::Formatter<'_>, x: &LtlFormula) -> fmt::Result {
            if x.is_atomic() {
                write!(f, "{x}")
            } else {
                write!(f, "({x})")
            }
        }
        fn chain(f: &mut fmt::Formatter<'_>, items: &[LtlFormula], op: &str) -> fmt::Result {
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    write!(f, " {op} ")?;
                }
                operand(f, x)?;
            }
            Ok(())
        }
        match self {
            LtlFormula::True => write!(f, "TRUE"),
            LtlFormula::False => write!(f, "FALSE"),
            LtlFormula::Atom(a) => write!(f, "{a}"),
            LtlFormula::Not(a) => write!(f, "!({a})"),
            LtlFormula::Next(a) => write!(f, "X ({a})"),
            LtlFormula::Finally(a) => write!(f, "F ({a})"),
            LtlFormula::Globally(a) => write!(f, "G ({a})"),
            LtlFormula::And(v) if v.is_empty() => write!(f, "TRUE"),
            LtlFormula::Or(v) if v.is_empty() => write!(f, "FALSE"),
            LtlFormula::And(v) => chain(f, v, "&"),
            LtlFormula::Or(v) => chain(f, v, "|"),
            LtlFormula::Implies(a, b) => write!(f, "({a}) -> ({b})"),
            LtlFormula::Until(a, b) => write!(f, "({a}) U ({b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("LTL syntax error: {0}")]
pub struct LtlParseError(pub String);

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Op(&'static str),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Op(s) => write!(f, "{s}"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<Tok>, LtlParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            out.push(Tok::Op("->"));
            i += 2;
        } else if let Some(op) = ["(", ")", "!", "&", "|"].into_iter().find(|o| o.starts_with(c)) {
            out.push(Tok::Op(op));
            i += 1;
        } else if c.is_ascii_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            // Array-indexed atoms such as `p0[3]` are a single identifier.
            if chars.get(i) == Some(&'[') {
                while i < chars.len() && chars[i] != ']' {
                    i += 1;
                }
                if i == chars.len() {
                    return Err(LtlParseError("unterminated `[`".into()));
                }
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else {
            return Err(LtlParseError(format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Op(o)) if *o == op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_ident(&mut self, word: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(w)) if w == word) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn implication(&mut self) -> Result<LtlFormula, LtlParseError> {
        let lhs = self.disjunction()?;
        if self.eat_op("->") {
            let rhs = self.implication()?;
            return Ok(lhs.implies(rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<LtlFormula, LtlParseError> {
        let mut items = vec![self.conjunction()?];
        while self.eat_op("|") {
            items.push(self.conjunction()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            LtlFormula::Or(items)
        })
    }

    fn conjunction(&mut self) -> Result<LtlFormula, LtlParseError> {
        let mut items = vec![self.until()?];
        while self.eat_op("&") {
            items.push(self.until()?);
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            LtlFormula::And(items)
        })
    }

    fn until(&mut self) -> Result<LtlFormula, LtlParseError> {
        let lhs = self.unary()?;
        if self.eat_ident("U") {
            let rhs = self.until()?;
            return Ok(lhs.until(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<LtlFormula, LtlParseError> {
        if self.eat_op("!") {
            return Ok(self.unary()?.not());
        }
        for (word, make) in [
            ("X", LtlFormula::next as fn(LtlFormula) -> LtlFormula),
            ("F", LtlFormula::finally),
            ("G", LtlFormula::globally),
        ] {
            if self.eat_ident(word) {
                return Ok(make(self.unary()?));
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<LtlFormula, LtlParseError> {
        match self.tokens.get(self.pos).cloned() {
            Some(Tok::Op("(")) => {
                self.pos += 1;
                let f = self.implication()?;
                if !self.eat_op(")") {
                    return Err(LtlParseError("expected `)`".into()));
                }
                Ok(f)
            }
            Some(Tok::Ident(w)) if w == "TRUE" => {
                self.pos += 1;
                Ok(LtlFormula::True)
            }
            Some(Tok::Ident(w)) if w == "FALSE" => {
                self.pos += 1;
                Ok(LtlFormula::False)
            }
            Some(Tok::Ident(w)) if !["U", "X", "F", "G"].contains(&w.as_str()) => {
                self.pos += 1;
                Ok(LtlFormula::Atom(w))
            }
            Some(t) => Err(LtlParseError(format!("unexpected `{t}`"))),
            None => Err(LtlParseError("unexpected end of formula".into())),
        }
    }
}

/// Truth of every subformula position-wise on an ultimately periodic word:
/// positions `0..len`, where the successor of `len - 1` is `loop_start`.
/// Fixpoint iteration; independent of any automaton construction.
pub fn eval_on_lasso(
    formula: &LtlFormula,
    len: usize,
    loop_start: usize,
    holds: &dyn Fn(usize, &str) -> bool,
) -> Vec<bool> {
    assert!(loop_start < len, "lasso loop must start inside the word");
    let succ = |i: usize| if i + 1 == len { loop_start } else { i + 1 };
    let fixpoint = |init: bool, step: &dyn Fn(usize, &[bool]) -> bool| {
        let mut v = vec![init; len];
        loop {
            let mut changed = false;
            for i in (0..len).rev() {
                let nv = step(i, &v);
                if nv != v[i] {
                    v[i] = nv;
                    changed = true;
                }
            }
            if !changed {
                return v;
            }
        }
    };
    match formula {
        LtlFormula::True => vec![true; len],
        LtlFormula::False => vec![false; len],
        LtlFormula::Atom(a) => (0..len).map(|i| holds(i, a)).collect(),
        LtlFormula::Not(a) => eval_on_lasso(a, len, loop_start, holds)
            .into_iter()
            .map(|b| !b)
            .collect(),
        LtlFormula::And(v) => {
            let mut out = vec![true; len];
            for f in v {
                for (o, b) in out.iter_mut().zip(eval_on_lasso(f, len, loop_start, holds)) {
                    *o &= b;
                }
            }
            out
        }
        LtlFormula::Or(v) => {
            let mut out = vec![false; len];
            for f in v {
                for (o, b) in out.iter_mut().zip(eval_on_lasso(f, len, loop_start, holds)) {
                    *o |= b;
                }
            }
            out
        }
        LtlFormula::Implies(a, b) => {
            let a = eval_on_lasso(a, len, loop_start, holds);
            let b = eval_on_lasso(b, len, loop_start, holds);
            a.into_iter().zip(b).map(|(a, b)| !a || b).collect()
        }
        LtlFormula::Next(a) => {
            let a = eval_on_lasso(a, len, loop_start, holds);
            (0..len).map(|i| a[succ(i)]).collect()
        }
        LtlFormula::Until(a, b) => {
            let a = eval_on_lasso(a, len, loop_start, holds);
            let b = eval_on_lasso(b, len, loop_start, holds);
            fixpoint(false, &|i, v| b[i] || (a[i] && v[succ(i)]))
        }
        LtlFormula::Finally(b) => {
            let b = eval_on_lasso(b, len, loop_start, holds);
            fixpoint(false, &|i, v| b[i] || v[succ(i)])
        }
        LtlFormula::Globally(a) => {
            let a = eval_on_lasso(a, len, loop_start, holds);
            fixpoint(true, &|i, v| a[i] && v[succ(i)])
        }
    }
}

/// Truth at position 0 of the lasso word `stem · cycle^ω`.
pub fn holds_on_lasso(
    formula: &LtlFormula,
    stem: &[BTreeSet<String>],
    cycle: &[BTreeSet<String>],
) -> bool {
    assert!(!cycle.is_empty(), "lasso cycle must be non-empty");
    let word: Vec<&BTreeSet<String>> = stem.iter().chain(cycle).collect();
    eval_on_lasso(formula, word.len(), stem.len(), &|i, a| word[i].contains(a))[0]
}
