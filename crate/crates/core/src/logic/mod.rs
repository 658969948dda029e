//! Two-layer specification logic: monadic first-order sentences about clients
//! (the atoms) composed with propositional temporal operators.

mod bound;
mod eval;
mod wf;

pub use bound::{bound_profile, BoundProfile, TypeBound};
pub use eval::{eval_mfo, eval_mfstl, EvalError, Instant, Shape, TraceModel, Valuation};
pub use wf::{check_well_formed, WfIssue};

use std::collections::BTreeSet;
use std::fmt;

/// Client formula. Quantifiers carry the sort (client type name) of their
/// variable; predicates carry the sort they are typed at.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MfoFormula {
    /// `base_sort(var)`, e.g. `req_h(x)`.
    Pred {
        base: String,
        sort: String,
        var: String,
    },
    Eq(String, String),
    Not(Box<MfoFormula>),
    Or(Box<MfoFormula>, Box<MfoFormula>),
    And(Box<MfoFormula>, Box<MfoFormula>),
    Implies(Box<MfoFormula>, Box<MfoFormula>),
    Exists {
        var: String,
        sort: String,
        body: Box<MfoFormula>,
    },
    Forall {
        var: String,
        sort: String,
        body: Box<MfoFormula>,
    },
}

impl MfoFormula {
    pub fn pred(base: &str, sort: &str, var: &str) -> Self {
        MfoFormula::Pred {
            base: base.into(),
            sort: sort.into(),
            var: var.into(),
        }
    }

    pub fn eq(x: &str, y: &str) -> Self {
        MfoFormula::Eq(x.into(), y.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        MfoFormula::Not(Box::new(self))
    }

    pub fn or(self, rhs: Self) -> Self {
        MfoFormula::Or(Box::new(self), Box::new(rhs))
    }

    pub fn and(self, rhs: Self) -> Self {
        MfoFormula::And(Box::new(self), Box::new(rhs))
    }

    pub fn implies(self, rhs: Self) -> Self {
        MfoFormula::Implies(Box::new(self), Box::new(rhs))
    }

    pub fn exists(var: &str, sort: &str, body: Self) -> Self {
        MfoFormula::Exists {
            var: var.into(),
            sort: sort.into(),
            body: Box::new(body),
        }
    }

    pub fn forall(var: &str, sort: &str, body: Self) -> Self {
        MfoFormula::Forall {
            var: var.into(),
            sort: sort.into(),
            body: Box::new(body),
        }
    }

    /// Variables occurring outside the scope of any binder for them.
    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go(f: &MfoFormula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match f {
                MfoFormula::Pred { var, .. } => {
                    if !bound.contains(var) {
                        out.insert(var.clone());
                    }
                }
                MfoFormula::Eq(x, y) => {
                    for v in [x, y] {
                        if !bound.contains(v) {
                            out.insert(v.clone());
                        }
                    }
                }
                MfoFormula::Not(a) => go(a, bound, out),
                MfoFormula::Or(a, b) | MfoFormula::And(a, b) | MfoFormula::Implies(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                MfoFormula::Exists { var, body, .. } | MfoFormula::Forall { var, body, .. } => {
                    bound.push(var.clone());
                    go(body, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn quantifier_count(&self) -> usize {
        match self {
            MfoFormula::Pred { .. } | MfoFormula::Eq(..) => 0,
            MfoFormula::Not(a) => a.quantifier_count(),
            MfoFormula::Or(a, b) | MfoFormula::And(a, b) | MfoFormula::Implies(a, b) => {
                a.quantifier_count() + b.quantifier_count()
            }
            MfoFormula::Exists { body, .. } | MfoFormula::Forall { body, .. } => {
                1 + body.quantifier_count()
            }
        }
    }

    fn is_atomic(&self) -> bool {
        matches!(self, MfoFormula::Pred { .. })
    }
}

/// Temporal formula over server propositions and MFO sentences.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum MfstlFormula {
    True,
    False,
    Prop(String),
    Mfo(MfoFormula),
    Not(Box<MfstlFormula>),
    Or(Box<MfstlFormula>, Box<MfstlFormula>),
    And(Box<MfstlFormula>, Box<MfstlFormula>),
    Implies(Box<MfstlFormula>, Box<MfstlFormula>),
    Next(Box<MfstlFormula>),
    Until(Box<MfstlFormula>, Box<MfstlFormula>),
    Finally(Box<MfstlFormula>),
    Globally(Box<MfstlFormula>),
}

impl MfstlFormula {
    pub fn prop(name: &str) -> Self {
        MfstlFormula::Prop(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        MfstlFormula::Not(Box::new(self))
    }

    pub fn or(self, rhs: Self) -> Self {
        MfstlFormula::Or(Box::new(self), Box::new(rhs))
    }

    pub fn and(self, rhs: Self) -> Self {
        MfstlFormula::And(Box::new(self), Box::new(rhs))
    }

    pub fn implies(self, rhs: Self) -> Self {
        MfstlFormula::Implies(Box::new(self), Box::new(rhs))
    }

    pub fn next(self) -> Self {
        MfstlFormula::Next(Box::new(self))
    }

    pub fn until(self, rhs: Self) -> Self {
        MfstlFormula::Until(Box::new(self), Box::new(rhs))
    }

    pub fn finally(self) -> Self {
        MfstlFormula::Finally(Box::new(self))
    }

    pub fn globally(self) -> Self {
        MfstlFormula::Globally(Box::new(self))
    }

    /// Embedded MFO atoms, left to right.
    pub fn mfo_atoms(&self) -> Vec<&MfoFormula> {
        let mut out = Vec::new();
        self.visit(&mut |f| {
            if let MfstlFormula::Mfo(a) = f {
                out.push(a);
            }
        });
        out
    }

    pub fn server_props(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let MfstlFormula::Prop(p) = f {
                out.insert(p.as_str());
            }
        });
        out
    }

    pub fn has_temporal(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| {
            found |= matches!(
                f,
                MfstlFormula::Next(_)
                    | MfstlFormula::Until(..)
                    | MfstlFormula::Finally(_)
                    | MfstlFormula::Globally(_)
            );
        });
        found
    }

    fn visit<'a>(&'a self, f: &mut dyn FnMut(&'a MfstlFormula)) {
        f(self);
        match self {
            MfstlFormula::True
            | MfstlFormula::False
            | MfstlFormula::Prop(_)
            | MfstlFormula::Mfo(_) => {}
            MfstlFormula::Not(a)
            | MfstlFormula::Next(a)
            | MfstlFormula::Finally(a)
            | MfstlFormula::Globally(a) => a.visit(f),
            MfstlFormula::Or(a, b)
            | MfstlFormula::And(a, b)
            | MfstlFormula::Implies(a, b)
            | MfstlFormula::Until(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    fn is_atomic(&self) -> bool {
        match self {
            MfstlFormula::True | MfstlFormula::False | MfstlFormula::Prop(_) => true,
            MfstlFormula::Mfo(a) => a.is_atomic(),
            _ => false,
        }
    }
}

struct Wrapped<'a, T>(&'a T, bool);

impl<T: fmt::Display> fmt::Display for Wrapped<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.1 {
            write!(f, "{}", self.0)
        } else {
            write!(f, "({})", self.0)
        }
    }
}

fn wrap_mfo(f: &MfoFormula) -> Wrapped<'_, MfoFormula> {
    Wrapped(f, f.is_atomic())
}

fn wrap_mfstl(f: &MfstlFormula) -> Wrapped<'_, MfstlFormula> {
    Wrapped(f, f.is_atomic())
}

/// Concrete syntax accepted by the spec parser; every non-atomic operand is
/// parenthesized so the text re-parses to the same tree.
impl fmt::Display for MfoFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MfoFormula::Pred { base, sort, var } => write!(f, "{base}_{sort}({var})"),
            MfoFormula::Eq(x, y) => write!(f, "{x} = {y}"),
            MfoFormula::Not(a) => write!(f, "!{}", wrap_mfo(a)),
            MfoFormula::Or(a, b) => write!(f, "{} | {}", wrap_mfo(a), wrap_mfo(b)),
            MfoFormula::And(a, b) => write!(f, "{} & {}", wrap_mfo(a), wrap_mfo(b)),
            MfoFormula::Implies(a, b) => write!(f, "{} -> {}", wrap_mfo(a), wrap_mfo(b)),
            MfoFormula::Exists { var, sort, body } => write!(f, "(E {var}:{sort}){}", wrap_mfo(body)),
            MfoFormula::Forall { var, sort, body } => write!(f, "(A {var}:{sort}){}", wrap_mfo(body)),
        }
    }
}

impl fmt::Display for MfstlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MfstlFormula::True => write!(f, "TRUE"),
            MfstlFormula::False => write!(f, "FALSE"),
            MfstlFormula::Prop(p) => write!(f, "{p}"),
            MfstlFormula::Mfo(a) => write!(f, "{a}"),
            MfstlFormula::Not(a) => write!(f, "!{}", wrap_mfstl(a)),
            MfstlFormula::Or(a, b) => write!(f, "{} | {}", wrap_mfstl(a), wrap_mfstl(b)),
            MfstlFormula::And(a, b) => write!(f, "{} & {}", wrap_mfstl(a), wrap_mfstl(b)),
            MfstlFormula::Implies(a, b) => write!(f, "{} -> {}", wrap_mfstl(a), wrap_mfstl(b)),
            MfstlFormula::Next(a) => write!(f, "X {}", wrap_mfstl(a)),
            MfstlFormula::Until(a, b) => write!(f, "{} U {}", wrap_mfstl(a), wrap_mfstl(b)),
            MfstlFormula::Finally(a) => write!(f, "F {}", wrap_mfstl(a)),
            MfstlFormula::Globally(a) => write!(f, "G {}", wrap_mfstl(a)),
        }
    }
}
