//! Specification syntax. Precedence from tightest: unary operators
//! (`!`, `X`, `F`, `G` and quantifiers), `U` (right associative), `&`, `|`,
//! `->` (right associative). Quantifiers are written `(E x:h)`, `(A x)`,
//! `(Ex)` or `(Ex:h)` and bind like unary operators, so their body is a single
//! operand: `(E x:h)(req_h(x) & (A y:h)(req_h(y) -> x = y))`.

use crate::logic::{check_well_formed, MfoFormula, MfstlFormula};
use crate::model::ServiceAlphabet;

use super::lexer::{lex, Cursor, TokKind};
use super::{Diagnostic, Parsed, Span};

const KEYWORDS: [&str; 8] = ["X", "F", "G", "U", "E", "A", "TRUE", "FALSE"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bin {
    And,
    Or,
    Implies,
    Until,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Temporal {
    Next,
    Finally,
    Globally,
}

impl Temporal {
    fn symbol(self) -> &'static str {
        match self {
            Temporal::Next => "X",
            Temporal::Finally => "F",
            Temporal::Globally => "G",
        }
    }
}

#[derive(Debug, Clone)]
enum Kind {
    True,
    False,
    Prop(String),
    Pred {
        base: &'static str,
        sort: Option<String>,
        var: String,
    },
    Eq(String, String),
    Not(Box<Node>),
    Bin(Bin, Box<Node>, Box<Node>),
    Temporal(Temporal, Box<Node>),
    Quant {
        exists: bool,
        var: String,
        sort: Option<String>,
        body: Box<Node>,
    },
}

#[derive(Debug, Clone)]
struct Node {
    kind: Kind,
    span: Span,
}

impl Node {
    fn sorts<'a>(&'a self, out: &mut Vec<&'a str>) {
        let mut add = |s: &'a Option<String>| {
            if let Some(s) = s {
                if !out.contains(&s.as_str()) {
                    out.push(s);
                }
            }
        };
        match &self.kind {
            Kind::True | Kind::False | Kind::Prop(_) | Kind::Eq(..) => {}
            Kind::Pred { sort, .. } => add(sort),
            Kind::Quant { sort, body, .. } => {
                add(sort);
                body.sorts(out);
            }
            Kind::Not(a) | Kind::Temporal(_, a) => a.sorts(out),
            Kind::Bin(_, a, b) => {
                a.sorts(out);
                b.sorts(out);
            }
        }
    }
}

fn predicate_base(name: &str) -> Option<(&'static str, Option<String>)> {
    match name {
        "p" | "req" => return Some(("req", None)),
        "q" | "ans" => return Some(("ans", None)),
        _ => {}
    }
    for (prefix, base) in [("req_", "req"), ("ans_", "ans")] {
        if let Some(sort) = name.strip_prefix(prefix) {
            if !sort.is_empty() {
                return Some((base, Some(sort.to_string())));
            }
        }
    }
    None
}

struct Parser<'c> {
    c: &'c mut Cursor,
}

impl Parser<'_> {
    fn node(&self, kind: Kind, start: Span) -> Node {
        Node {
            kind,
            span: start.to(self.c.prev_span()),
        }
    }

    fn implies(&mut self) -> Result<Node, Diagnostic> {
        let start = self.c.span();
        let lhs = self.or()?;
        if self.c.is_sym("->") {
            self.c.pos += 1;
            let rhs = self.implies()?;
            return Ok(self.node(Kind::Bin(Bin::Implies, Box::new(lhs), Box::new(rhs)), start));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Node, Diagnostic> {
        let start = self.c.span();
        let mut lhs = self.and()?;
        while self.c.is_sym("|") {
            self.c.pos += 1;
            let rhs = self.and()?;
            lhs = self.node(Kind::Bin(Bin::Or, Box::new(lhs), Box::new(rhs)), start);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Node, Diagnostic> {
        let start = self.c.span();
        let mut lhs = self.until()?;
        while self.c.is_sym("&") {
            self.c.pos += 1;
            let rhs = self.until()?;
            lhs = self.node(Kind::Bin(Bin::And, Box::new(lhs), Box::new(rhs)), start);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Node, Diagnostic> {
        let start = self.c.span();
        let lhs = self.unary()?;
        if self.c.is_ident("U") {
            self.c.pos += 1;
            let rhs = self.until()?;
            return Ok(self.node(Kind::Bin(Bin::Until, Box::new(lhs), Box::new(rhs)), start));
        }
        Ok(lhs)
    }

    fn starts_operand(&self, offset: usize) -> bool {
        match self.c.peek_at(offset) {
            Some(TokKind::Ident(s)) => s != "U",
            Some(TokKind::Sym(s)) => *s == "(" || *s == "!",
            _ => false,
        }
    }

    /// Recognizes a quantifier prefix at the cursor without consuming it.
    /// Returns (exists, var, tokens before the optional sort).
    fn quantifier_ahead(&self) -> Option<(bool, String, usize)> {
        if !self.c.is_sym("(") {
            return None;
        }
        let Some(TokKind::Ident(word)) = self.c.peek_at(1) else {
            return None;
        };
        let exists = match word.chars().next() {
            Some('E') => true,
            Some('A') => false,
            _ => return None,
        };
        if word.len() == 1 {
            if let Some(TokKind::Ident(var)) = self.c.peek_at(2) {
                return Some((exists, var.clone(), 3));
            }
            return None;
        }
        let var = word[1..].to_string();
        match self.c.peek_at(2) {
            Some(TokKind::Sym(":")) => Some((exists, var, 2)),
            Some(TokKind::Sym(")")) if self.starts_operand(3) => Some((exists, var, 2)),
            _ => None,
        }
    }

    fn unary(&mut self) -> Result<Node, Diagnostic> {
        let start = self.c.span();
        if self.c.is_sym("!") {
            self.c.pos += 1;
            let a = self.unary()?;
            return Ok(self.node(Kind::Not(Box::new(a)), start));
        }
        for op in [Temporal::Next, Temporal::Finally, Temporal::Globally] {
            if self.c.is_ident(op.symbol()) {
                self.c.pos += 1;
                let a = self.unary()?;
                return Ok(self.node(Kind::Temporal(op, Box::new(a)), start));
            }
        }
        if let Some((exists, var, skip)) = self.quantifier_ahead() {
            self.c.pos += skip;
            let sort = if self.c.is_sym(":") {
                self.c.pos += 1;
                Some(self.c.expect_ident("a client type")?.0)
            } else {
                None
            };
            self.c.expect_sym(")")?;
            let body = self.unary()?;
            return Ok(self.node(
                Kind::Quant {
                    exists,
                    var,
                    sort,
                    body: Box::new(body),
                },
                start,
            ));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Node, Diagnostic> {
        let start = self.c.span();
        if self.c.is_sym("(") {
            self.c.pos += 1;
            let inner = self.implies()?;
            self.c.expect_sym(")")?;
            return Ok(Node {
                kind: inner.kind,
                span: start.to(self.c.prev_span()),
            });
        }
        let (name, span) = self.c.expect_ident("a formula")?;
        match name.as_str() {
            "TRUE" => return Ok(self.node(Kind::True, start)),
            "FALSE" => return Ok(self.node(Kind::False, start)),
            "U" | "E" | "A" => {
                return Err(Diagnostic::error(span, format!("unexpected `{name}`")));
            }
            _ => {}
        }
        if self.c.is_sym("(") {
            let Some((base, sort)) = predicate_base(&name) else {
                return Err(Diagnostic::error(
                    span,
                    format!("unknown predicate `{name}` (expected req_T, ans_T, req, ans, p or q)"),
                ));
            };
            self.c.pos += 1;
            let (var, _) = self.c.expect_ident("a client variable")?;
            self.c.expect_sym(")")?;
            return Ok(self.node(Kind::Pred { base, sort, var }, start));
        }
        if self.c.is_sym("=") {
            self.c.pos += 1;
            let (rhs, _) = self.c.expect_ident("a client variable")?;
            return Ok(self.node(Kind::Eq(name, rhs), start));
        }
        Ok(self.node(Kind::Prop(name), start))
    }
}

/// Parses one formula running to the end of the tokens, with an optional
/// trailing `;`.
fn parse_node(c: &mut Cursor) -> Result<Node, Diagnostic> {
    if c.at_end() {
        return Err(Diagnostic::error(c.span(), "expected a formula, found end of input"));
    }
    let node = Parser { c }.implies()?;
    if c.is_sym(";") {
        c.pos += 1;
    }
    if !c.at_end() {
        return Err(Diagnostic::error(
            c.span(),
            format!("unexpected {} after the formula", c.describe()),
        ));
    }
    Ok(node)
}

struct Resolver<'a> {
    alphabet: &'a ServiceAlphabet,
    /// Keep free variables instead of reporting them.
    lenient: bool,
    diags: Vec<Diagnostic>,
}

const CROSSING: &str = "client variables cannot range across temporal operators";

impl Resolver<'_> {
    fn mfstl(&mut self, n: &Node) -> Option<MfstlFormula> {
        use MfstlFormula as T;
        Some(match &n.kind {
            Kind::True => T::True,
            Kind::False => T::False,
            Kind::Prop(p) => T::Prop(p.clone()),
            Kind::Pred { .. } | Kind::Eq(..) | Kind::Quant { .. } => {
                T::Mfo(self.mfo(n, &mut Vec::new())?)
            }
            Kind::Not(a) => self.mfstl(a)?.not(),
            Kind::Temporal(op, a) => {
                let a = self.mfstl(a)?;
                match op {
                    Temporal::Next => a.next(),
                    Temporal::Finally => a.finally(),
                    Temporal::Globally => a.globally(),
                }
            }
            Kind::Bin(op, a, b) => {
                let (a, b) = (self.mfstl(a), self.mfstl(b));
                let (a, b) = (a?, b?);
                match op {
                    Bin::And => a.and(b),
                    Bin::Or => a.or(b),
                    Bin::Implies => a.implies(b),
                    Bin::Until => a.until(b),
                }
            }
        })
    }

    fn free(&mut self, var: &str, span: Span) {
        if self.lenient {
            return;
        }
        self.diags.push(Diagnostic::error(
            span,
            format!("free variable `{var}`: bind it with a quantifier inside the same sentence; {CROSSING}"),
        ));
    }

    fn mfo(&mut self, n: &Node, scope: &mut Vec<(String, String)>) -> Option<MfoFormula> {
        let lookup = |scope: &[(String, String)], v: &str| {
            scope.iter().rev().find(|(x, _)| x == v).map(|(_, s)| s.clone())
        };
        let innermost = scope.last().map(|(v, _)| v.clone());
        match &n.kind {
            Kind::Pred { base, sort, var } => {
                let bound = lookup(scope, var);
                if bound.is_none() {
                    self.free(var, n.span);
                }
                let fallback = self.alphabet.names().first().cloned().unwrap_or_default();
                let sort = sort.clone().or(bound).unwrap_or(fallback);
                Some(MfoFormula::pred(base, &sort, var))
            }
            Kind::Eq(x, y) => {
                let (sx, sy) = (lookup(scope, x), lookup(scope, y));
                if sx.is_none() {
                    self.free(x, n.span);
                }
                if sy.is_none() && x != y {
                    self.free(y, n.span);
                }
                (self.lenient || (sx.is_some() && sy.is_some())).then(|| MfoFormula::eq(x, y))
            }
            Kind::Not(a) => Some(self.mfo(a, scope)?.not()),
            Kind::Bin(Bin::Until, ..) | Kind::Temporal(..) => {
                let op = match &n.kind {
                    Kind::Temporal(t, _) => t.symbol(),
                    _ => "U",
                };
                self.diags.push(Diagnostic::error(
                    n.span,
                    format!(
                        "temporal operator `{op}` inside the quantifier over `{}`; {CROSSING}",
                        innermost.unwrap_or_default()
                    ),
                ));
                None
            }
            Kind::Bin(op, a, b) => {
                let (a, b) = (self.mfo(a, scope), self.mfo(b, scope));
                let (a, b) = (a?, b?);
                Some(match op {
                    Bin::And => a.and(b),
                    Bin::Or => a.or(b),
                    _ => a.implies(b),
                })
            }
            Kind::Prop(p) => {
                self.diags.push(Diagnostic::error(
                    n.span,
                    format!("server proposition `{p}` inside the quantifier over `{}`", innermost.unwrap_or_default()),
                ));
                None
            }
            Kind::True | Kind::False => {
                self.diags.push(Diagnostic::error(
                    n.span,
                    "TRUE and FALSE are not allowed inside a quantifier",
                ));
                None
            }
            Kind::Quant {
                exists,
                var,
                sort,
                body,
            } => {
                let sort = match sort {
                    Some(s) => s.clone(),
                    None => match self.alphabet.single() {
                        Some(t) => self.alphabet.name(t).to_string(),
                        None => {
                            self.diags.push(Diagnostic::error(
                                n.span,
                                format!(
                                    "quantifier over `{var}` needs a client type, as in `({} {var}:{})`",
                                    if *exists { "E" } else { "A" },
                                    self.alphabet.names().first().map_or("h", String::as_str)
                                ),
                            ));
                            return None;
                        }
                    },
                };
                scope.push((var.clone(), sort.clone()));
                let body = self.mfo(body, scope);
                scope.pop();
                let body = body?;
                Some(if *exists {
                    MfoFormula::exists(var, &sort, body)
                } else {
                    MfoFormula::forall(var, &sort, body)
                })
            }
        }
    }
}

fn resolve(
    node: &Node,
    alphabet: &ServiceAlphabet,
    check: bool,
) -> Result<MfstlFormula, Vec<Diagnostic>> {
    let mut r = Resolver {
        alphabet,
        lenient: !check,
        diags: Vec::new(),
    };
    let formula = r.mfstl(node);
    let mut diags = r.diags;
    let Some(formula) = formula.filter(|_| diags.is_empty()) else {
        return Err(diags);
    };
    if check {
        if let Err(issues) = check_well_formed(&formula, alphabet) {
            diags.extend(issues.iter().map(|i| Diagnostic::error(node.span, i.to_string())));
            return Err(diags);
        }
    }
    Ok(formula)
}

/// Sorts mentioned by the formula in order of appearance, or `u0`.
fn inferred_alphabet(node: &Node) -> ServiceAlphabet {
    let mut sorts = Vec::new();
    node.sorts(&mut sorts);
    if sorts.is_empty() {
        sorts.push("u0");
    }
    ServiceAlphabet::new(sorts).expect("distinct non-empty sort names")
}

fn header(c: &mut Cursor) -> Result<Option<(ServiceAlphabet, Span)>, Diagnostic> {
    let is_header = c.is_ident("types") && matches!(c.peek_at(1), Some(TokKind::Ident(_)));
    if !is_header {
        return Ok(None);
    }
    let start = c.span();
    c.pos += 1;
    let mut names = vec![c.expect_ident("a client type")?];
    while c.is_sym(",") {
        c.pos += 1;
        names.push(c.expect_ident("a client type")?);
    }
    c.expect_sym(";")?;
    let span = start.to(c.prev_span());
    for (i, (n, s)) in names.iter().enumerate() {
        if names[..i].iter().any(|(m, _)| m == n) {
            return Err(Diagnostic::error(*s, format!("client type `{n}` declared twice")));
        }
        if KEYWORDS.contains(&n.as_str()) {
            return Err(Diagnostic::error(*s, format!("`{n}` is reserved")));
        }
    }
    let alphabet = ServiceAlphabet::new(names.into_iter().map(|(n, _)| n))
        .map_err(|e| Diagnostic::error(span, e.to_string()))?;
    Ok(Some((alphabet, span)))
}

fn parse_file(
    text: &str,
    model: Option<&ServiceAlphabet>,
    check: bool,
) -> Parsed<(ServiceAlphabet, MfstlFormula)> {
    let toks = lex(text).map_err(|d| vec![d])?;
    let mut c = Cursor::new(toks, text);
    let declared = header(&mut c).map_err(|d| vec![d])?;
    let node = parse_node(&mut c).map_err(|d| vec![d])?;
    let alphabet = match (declared, model) {
        (Some((h, span)), Some(m)) if &h != m => {
            return Err(vec![Diagnostic::error(
                span,
                format!(
                    "client types `{}` differ from the model's `{}`",
                    h.names().join(", "),
                    m.names().join(", ")
                ),
            )]);
        }
        (Some((h, _)), _) => h,
        (None, Some(m)) => m.clone(),
        (None, None) => inferred_alphabet(&node),
    };
    let formula = resolve(&node, &alphabet, check)?;
    Ok(((alphabet, formula), Vec::new()))
}

/// Parses a specification against known client types and checks that it is
/// well formed.
pub fn parse_mfstl(text: &str, alphabet: &ServiceAlphabet) -> Parsed<MfstlFormula> {
    parse_file(text, Some(alphabet), true).map(|((_, f), w)| (f, w))
}

/// Parses a `.mfstl` file: an optional `types h, l;` header and one formula.
/// Client types come from the header, else from `model`, else from the
/// sorts the formula mentions (`u0` when it mentions none).
pub fn parse_mfstl_file(
    text: &str,
    model: Option<&ServiceAlphabet>,
) -> Parsed<(ServiceAlphabet, MfstlFormula)> {
    parse_file(text, model, true)
}

/// Syntax only: resolves sorts but skips the well-formedness check, so
/// free variables are kept.
pub fn parse_mfstl_syntax(text: &str) -> Parsed<MfstlFormula> {
    parse_file(text, None, false).map(|((_, f), w)| (f, w))
}

/// Parses the formula of a combined file, starting after `MFSTLSPEC`.
pub(super) fn parse_from(
    c: &mut Cursor,
    alphabet: &ServiceAlphabet,
    keyword: Span,
) -> Parsed<MfstlFormula> {
    if c.at_end() {
        return Err(vec![Diagnostic::error(keyword, "`MFSTLSPEC` without a formula")]);
    }
    let node = parse_node(c).map_err(|d| vec![d])?;
    Ok((resolve(&node, alphabet, true)?, Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{MfoFormula as M, MfstlFormula as T};
    use proptest::prelude::*;

    fn single() -> ServiceAlphabet {
        ServiceAlphabet::new(["u0"]).unwrap()
    }

    fn hl() -> ServiceAlphabet {
        ServiceAlphabet::new(["h", "l"]).unwrap()
    }

    fn ok(text: &str, a: &ServiceAlphabet) -> T {
        match parse_mfstl(text, a) {
            Ok((f, _)) => f,
            Err(d) => panic!("{text}: {d:?}"),
        }
    }

    fn some_req() -> T {
        T::Mfo(M::exists("x", "u0", M::pred("req", "u0", "x")))
    }

    fn some_ans() -> T {
        T::Mfo(M::exists("x", "u0", M::pred("ans", "u0", "x")))
    }

    #[test]
    fn compact_and_spelled_quantifiers_agree() {
        let a = single();
        for text in ["(Ex)p(x)", "(E x)p(x)", "(Ex:u0)req(x)", "(E x:u0)req_u0(x)", "((Ex) p(x))"] {
            assert_eq!(ok(text, &a), some_req(), "{text}");
        }
    }

    #[test]
    fn response_with_next() {
        let f = ok("G((Ex)p(x) -> X((Ex)q(x)))", &single());
        assert_eq!(f, some_req().implies(some_ans().next()).globally());
    }

    #[test]
    fn precedence_and_associativity() {
        let a = single();
        let (p, q, r) = (T::prop("a"), T::prop("b"), T::prop("c"));
        assert_eq!(ok("a | b & c", &a), p.clone().or(q.clone().and(r.clone())));
        assert_eq!(ok("a -> b -> c", &a), p.clone().implies(q.clone().implies(r.clone())));
        assert_eq!(ok("a U b U c", &a), p.clone().until(q.clone().until(r.clone())));
        assert_eq!(ok("a & b U c", &a), p.clone().and(q.clone().until(r.clone())));
        assert_eq!(ok("!a U X b", &a), p.clone().not().until(q.clone().next()));
        assert_eq!(ok("F G a | b", &a), p.globally().finally().or(q));
    }

    #[test]
    fn quantifier_binds_tightly() {
        let f = ok("(Ex)p(x) & TRUE", &single());
        assert_eq!(f, some_req().and(T::True));
    }

    #[test]
    fn equality_and_nested_quantifiers() {
        let f = ok("(E x:h)(req_h(x) & (A y:h)(req_h(y) -> x = y))", &hl());
        let expect = M::exists(
            "x",
            "h",
            M::pred("req", "h", "x").and(M::forall("y", "h", M::pred("req", "h", "y").implies(M::eq("x", "y")))),
        );
        assert_eq!(f, T::Mfo(expect));
    }

    #[test]
    fn bare_predicate_takes_the_binder_sort() {
        let f = ok("(E x:l)ans(x)", &hl());
        assert_eq!(f, T::Mfo(M::exists("x", "l", M::pred("ans", "l", "x"))));
    }

    #[test]
    fn parenthesized_prop_named_like_a_quantifier() {
        assert_eq!(ok("(Ex) -> b", &single()), T::prop("Ex").implies(T::prop("b")));
    }

    #[test]
    fn temporal_inside_quantifier_is_rejected() {
        let errs = parse_mfstl("(Ex)(p(x) & X q(x))", &single()).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert!(errs[0].message.contains("temporal operator `X`"), "{}", errs[0]);
        assert_eq!((errs[0].span.start_col, errs[0].span.end_col), (13, 19));
    }

    #[test]
    fn variable_across_temporal_operator_is_free() {
        let errs = parse_mfstl("G(p(x) -> F q(x))", &single()).unwrap_err();
        assert_eq!(errs.len(), 2);
        assert!(errs.iter().all(|d| d.message.contains("free variable `x`")));
        assert_eq!(errs[0].span.start_col, 3);
    }

    #[test]
    fn sort_errors_come_from_the_well_formedness_pass() {
        let errs = parse_mfstl("(E x:h)(E y:l)(x = y)", &hl()).unwrap_err();
        assert!(errs[0].message.contains("crosses sorts"), "{}", errs[0]);
        let errs = parse_mfstl("(E x:k)req_k(x)", &hl()).unwrap_err();
        assert!(errs[0].message.contains("unknown client type `k`"));
        let errs = parse_mfstl("(E x)req_h(x)", &hl()).unwrap_err();
        assert!(errs[0].message.contains("needs a client type"));
    }

    #[test]
    fn syntax_errors_have_positions() {
        let errs = parse_mfstl("G((Ex)p(x) ->", &single()).unwrap_err();
        assert!(errs[0].message.contains("end of input"));
        let errs = parse_mfstl("foo(x)", &single()).unwrap_err();
        assert!(errs[0].message.contains("unknown predicate `foo`"));
        let errs = parse_mfstl("a b", &single()).unwrap_err();
        assert_eq!(errs[0].span.start_col, 3);
    }

    #[test]
    fn file_header_and_inference() {
        let ((a, _), _) = parse_mfstl_file("types h, l;\n(E x:l)req_l(x)", None).unwrap();
        assert_eq!(a, hl());
        let ((a, _), _) = parse_mfstl_file("(E x:l)req_l(x) | (E y:h)ans_h(y)", None).unwrap();
        assert_eq!(a.names(), ["l", "h"]);
        let ((a, _), _) = parse_mfstl_file("G TRUE;", None).unwrap();
        assert_eq!(a, single());
        let errs = parse_mfstl_file("types h; TRUE", Some(&single())).unwrap_err();
        assert!(errs[0].message.contains("differ from the model"));
        assert!(parse_mfstl_syntax("G p(x)").is_ok());
    }

    fn arb_mfo(depth: u32) -> BoxedStrategy<M> {
        // Sentences over h and l using x, y at h and z at l.
        let leaf = prop_oneof![
            (0usize..3, any::<bool>()).prop_map(|(v, req)| {
                let (var, sort) = [("x", "h"), ("y", "h"), ("z", "l")][v];
                M::pred(if req { "req" } else { "ans" }, sort, var)
            }),
            Just(M::eq("x", "y")),
        ];
        let body = leaf.prop_recursive(depth, 12, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(M::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
                (inner.clone(), inner).prop_map(|(a, b)| a.implies(b)),
            ]
        });
        (body, any::<[bool; 3]>())
            .prop_map(|(b, q)| {
                let wrap = |e: bool, v: &str, s: &str, b: M| {
                    if e { M::exists(v, s, b) } else { M::forall(v, s, b) }
                };
                wrap(q[0], "x", "h", wrap(q[1], "y", "h", wrap(q[2], "z", "l", b)))
            })
            .boxed()
    }

    fn arb_mfstl() -> impl Strategy<Value = T> {
        let leaf = prop_oneof![
            Just(T::True),
            Just(T::False),
            Just(T::prop("idle")),
            arb_mfo(2).prop_map(T::Mfo),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(T::not),
                inner.clone().prop_map(T::next),
                inner.clone().prop_map(T::finally),
                inner.clone().prop_map(T::globally),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.implies(b)),
                (inner.clone(), inner).prop_map(|(a, b)| a.until(b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_then_parse_is_identity(f in arb_mfstl()) {
            let text = f.to_string();
            let parsed = parse_mfstl(&text, &hl());
            prop_assert!(parsed.is_ok(), "{}: {:?}", text, parsed);
            prop_assert_eq!(parsed.unwrap().0, f);
        }
    }
}
