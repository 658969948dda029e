//! Quantifier elimination over the finite slot domain `{1..n_i}` of each
//! client type, producing propositional LTL over request/answer flag atoms.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::logic::{BoundProfile, MfoFormula, MfstlFormula};
use crate::ltl::LtlFormula;
use crate::model::TypeId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroundError {
    #[error("predicate `{0}` cannot be grounded; only req_<type> and ans_<type> are supported")]
    UnsupportedPredicate(String),
    #[error("unknown client type `{0}`")]
    UnknownType(String),
    #[error("client type `{0}` is quantified over but its bound is 0")]
    ZeroBound(String),
    #[error("variable `{0}` is free; only sentences can be grounded")]
    FreeVariable(String),
    #[error("variable `{var}` is bound at sort `{bound}` but used at sort `{used}`")]
    SortMismatch {
        var: String,
        bound: String,
        used: String,
    },
}

/// Which finite domain a quantifier over type `u_i` ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DomainMode {
    /// `{1..n_i}` with `n_i = 4 * r_i`; the domain also used by the bounded
    /// structure and the emitted SMV arrays.
    #[default]
    Bound,
    /// `{1..r_i}`: one slot per variable.
    VariableCount,
}

/// Names of the request (`p`) and answer (`q`) flag atoms of each type.
///
/// With a single client type the atoms are `p[j]` / `q[j]`; with several,
/// the type index is appended: `p0[j]`, `q1[j]`, ...
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundingMap {
    arrays: Vec<(String, String)>,
    bounds: Vec<usize>,
}

impl GroundingMap {
    pub fn new(bounds: &BoundProfile) -> Self {
        let single = bounds.len() == 1;
        let arrays = (0..bounds.len())
            .map(|i| {
                if single {
                    ("p".to_string(), "q".to_string())
                } else {
                    (format!("p{i}"), format!("q{i}"))
                }
            })
            .collect();
        GroundingMap {
            arrays,
            bounds: bounds.entries().iter().map(|e| e.n).collect(),
        }
    }

    pub fn req_array(&self, ty: TypeId) -> &str {
        &self.arrays[ty].0
    }

    pub fn ans_array(&self, ty: TypeId) -> &str {
        &self.arrays[ty].1
    }

    /// SMV counter variable for the type, following the same suffix rule.
    pub fn counter(&self, ty: TypeId) -> String {
        if self.arrays.len() == 1 {
            "ctr".to_string()
        } else {
            format!("ctr{ty}")
        }
    }

    pub fn req_atom(&self, ty: TypeId, slot: usize) -> String {
        format!("{}[{slot}]", self.arrays[ty].0)
    }

    pub fn ans_atom(&self, ty: TypeId, slot: usize) -> String {
        format!("{}[{slot}]", self.arrays[ty].1)
    }

    /// Every flag atom `p*[1..n]`, `q*[1..n]` across all types.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for (ty, &n) in self.bounds.iter().enumerate() {
            for j in 1..=n {
                out.insert(self.req_atom(ty, j));
                out.insert(self.ans_atom(ty, j));
            }
        }
        out
    }
}

struct Grounder<'a> {
    bounds: &'a BoundProfile,
    map: GroundingMap,
    mode: DomainMode,
}

pub fn ground_mfo(formula: &MfoFormula, bounds: &BoundProfile) -> Result<LtlFormula, GroundError> {
    ground_mfo_with(formula, bounds, DomainMode::Bound)
}

pub fn ground_mfo_with(
    formula: &MfoFormula,
    bounds: &BoundProfile,
    mode: DomainMode,
) -> Result<LtlFormula, GroundError> {
    let g = Grounder {
        bounds,
        map: GroundingMap::new(bounds),
        mode,
    };
    g.mfo(formula, &mut Vec::new())
}

pub fn ground_mfstl(
    formula: &MfstlFormula,
    bounds: &BoundProfile,
) -> Result<LtlFormula, GroundError> {
    ground_mfstl_with(formula, bounds, DomainMode::Bound)
}

pub fn ground_mfstl_with(
    formula: &MfstlFormula,
    bounds: &BoundProfile,
    mode: DomainMode,
) -> Result<LtlFormula, GroundError> {
    let g = Grounder {
        bounds,
        map: GroundingMap::new(bounds),
        mode,
    };
    g.mfstl(formula)
}

impl Grounder<'_> {
    fn type_of(&self, sort: &str) -> Result<TypeId, GroundError> {
        self.bounds
            .entries()
            .iter()
            .position(|e| e.ty == sort)
            .ok_or_else(|| GroundError::UnknownType(sort.to_string()))
    }

    fn domain(&self, sort: &str) -> Result<usize, GroundError> {
        let e = self.bounds.get(self.type_of(sort)?);
        let size = match self.mode {
            DomainMode::Bound => e.n,
            DomainMode::VariableCount => e.r,
        };
        if size == 0 {
            return Err(GroundError::ZeroBound(sort.to_string()));
        }
        Ok(size)
    }

    fn lookup<'e>(
        env: &'e [(String, String, usize)],
        var: &str,
    ) -> Result<&'e (String, String, usize), GroundError> {
        env.iter()
            .rev()
            .find(|(v, _, _)| v == var)
            .ok_or_else(|| GroundError::FreeVariable(var.to_string()))
    }

    fn mfo(
        &self,
        f: &MfoFormula,
        env: &mut Vec<(String, String, usize)>,
    ) -> Result<LtlFormula, GroundError> {
        Ok(match f {
            MfoFormula::Pred { base, sort, var } => {
                let (_, bound, slot) = Self::lookup(env, var)?;
                if bound != sort {
                    return Err(GroundError::SortMismatch {
                        var: var.clone(),
                        bound: bound.clone(),
                        used: sort.clone(),
                    });
                }
                let ty = self.type_of(sort)?;
                match base.as_str() {
                    "req" => LtlFormula::Atom(self.map.req_atom(ty, *slot)),
                    "ans" => LtlFormula::Atom(self.map.ans_atom(ty, *slot)),
                    _ => return Err(GroundError::UnsupportedPredicate(format!("{base}_{sort}"))),
                }
            }
            MfoFormula::Eq(x, y) => {
                let (_, sx, jx) = Self::lookup(env, x)?;
                let (_, sy, jy) = Self::lookup(env, y)?;
                if sx == sy && jx == jy {
                    LtlFormula::True
                } else {
                    LtlFormula::False
                }
            }
            MfoFormula::Not(a) => LtlFormula::negate(self.mfo(a, env)?),
            MfoFormula::Or(a, b) => LtlFormula::any_of([self.mfo(a, env)?, self.mfo(b, env)?]),
            MfoFormula::And(a, b) => LtlFormula::all_of([self.mfo(a, env)?, self.mfo(b, env)?]),
            MfoFormula::Implies(a, b) => LtlFormula::imply(self.mfo(a, env)?, self.mfo(b, env)?),
            MfoFormula::Exists { var, sort, body } => self.expand(var, sort, body, env, true)?,
            MfoFormula::Forall { var, sort, body } => self.expand(var, sort, body, env, false)?,
        })
    }

    /// One disjunct (conjunct) per slot, stopping as soon as the result is
    /// decided by a constant.
    fn expand(
        &self,
        var: &str,
        sort: &str,
        body: &MfoFormula,
        env: &mut Vec<(String, String, usize)>,
        existential: bool,
    ) -> Result<LtlFormula, GroundError> {
        let n = self.domain(sort)?;
        let mut parts = Vec::with_capacity(n);
        for slot in 1..=n {
            env.push((var.to_string(), sort.to_string(), slot));
            let part = self.mfo(body, env);
            env.pop();
            let part = part?;
            let decisive = if existential {
                LtlFormula::True
            } else {
                LtlFormula::False
            };
            if part == decisive {
                return Ok(decisive);
            }
            parts.push(part);
        }
        Ok(if existential {
            LtlFormula::any_of(parts)
        } else {
            LtlFormula::all_of(parts)
        })
    }

    fn mfstl(&self, f: &MfstlFormula) -> Result<LtlFormula, GroundError> {
        let b = |x: &MfstlFormula| self.mfstl(x);
        Ok(match f {
            MfstlFormula::True => LtlFormula::True,
            MfstlFormula::False => LtlFormula::False,
            MfstlFormula::Prop(p) => LtlFormula::Atom(p.clone()),
            MfstlFormula::Mfo(a) => self.mfo(a, &mut Vec::new())?,
            MfstlFormula::Not(a) => b(a)?.not(),
            MfstlFormula::Or(x, y) => LtlFormula::Or(vec![b(x)?, b(y)?]),
            MfstlFormula::And(x, y) => LtlFormula::And(vec![b(x)?, b(y)?]),
            MfstlFormula::Implies(x, y) => b(x)?.implies(b(y)?),
            MfstlFormula::Next(a) => b(a)?.next(),
            MfstlFormula::Until(x, y) => b(x)?.until(b(y)?),
            MfstlFormula::Finally(a) => b(a)?.finally(),
            MfstlFormula::Globally(a) => b(a)?.globally(),
        })
    }
}
