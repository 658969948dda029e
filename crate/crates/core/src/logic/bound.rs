use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::model::{ServiceAlphabet, TypeId};

use super::{MfoFormula, MfstlFormula};

/// Per-type variable count `r` and the derived domain size `n = 4 * r`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TypeBound {
    #[serde(rename = "type")]
    pub ty: String,
    pub vars: BTreeSet<String>,
    pub r: usize,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct BoundProfile {
    entries: Vec<TypeBound>,
}

impl BoundProfile {
    /// Builds a profile directly from per-type bounds `n` (with `r = n / 4`).
    /// Meant for tests and tools that pick bounds by hand.
    pub fn from_bounds(alphabet: &ServiceAlphabet, bounds: &[usize]) -> Self {
        assert_eq!(alphabet.len(), bounds.len(), "one bound per client type");
        BoundProfile {
            entries: alphabet
                .names()
                .iter()
                .zip(bounds)
                .map(|(ty, &n)| TypeBound {
                    ty: ty.clone(),
                    vars: BTreeSet::new(),
                    r: n / 4,
                    n,
                })
                .collect(),
        }
    }

    pub fn entries(&self) -> &[TypeBound] {
        &self.entries
    }

    pub fn get(&self, ty: TypeId) -> &TypeBound {
        &self.entries[ty]
    }

    pub fn n(&self, ty: TypeId) -> usize {
        self.entries[ty].n
    }

    pub fn by_name(&self, name: &str) -> Option<&TypeBound> {
        self.entries.iter().find(|e| e.ty == name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for BoundProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(f, "{}: r={} n={}", e.ty, e.r, e.n)?;
        }
        Ok(())
    }
}

/// Counts the distinct variable names used at each client type anywhere in
/// the formula and sets `n = 4 * r`.
pub fn bound_profile(formula: &MfstlFormula, alphabet: &ServiceAlphabet) -> BoundProfile {
    let mut vars: Vec<BTreeSet<String>> = vec![BTreeSet::new(); alphabet.len()];
    for atom in formula.mfo_atoms() {
        collect(atom, alphabet, &mut vars);
    }
    BoundProfile {
        entries: alphabet
            .names()
            .iter()
            .zip(vars)
            .map(|(ty, vars)| {
                let r = vars.len();
                TypeBound {
                    ty: ty.clone(),
                    vars,
                    r,
                    n: 4 * r,
                }
            })
            .collect(),
    }
}

fn collect(f: &MfoFormula, alphabet: &ServiceAlphabet, vars: &mut [BTreeSet<String>]) {
    let mut add = |sort: &str, var: &str| {
        if let Some(t) = alphabet.index_of(sort) {
            vars[t].insert(var.to_string());
        }
    };
    match f {
        MfoFormula::Pred { sort, var, .. } => add(sort, var),
        MfoFormula::Eq(..) => {}
        MfoFormula::Not(a) => collect(a, alphabet, vars),
        MfoFormula::Or(a, b) | MfoFormula::And(a, b) | MfoFormula::Implies(a, b) => {
            collect(a, alphabet, vars);
            collect(b, alphabet, vars);
        }
        MfoFormula::Exists { var, sort, body } | MfoFormula::Forall { var, sort, body } => {
            add(sort, var);
            collect(body, alphabet, vars);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::MfoFormula as M;
    use crate::logic::MfstlFormula as T;

    #[test]
    fn single_variable_gives_four() {
        let a = ServiceAlphabet::new(["u0"]).unwrap();
        let spec = T::Mfo(M::exists("x", "u0", M::pred("req", "u0", "x")))
            .implies(T::Mfo(M::exists("x", "u0", M::pred("ans", "u0", "x"))).next())
            .globally();
        let b = bound_profile(&spec, &a);
        assert_eq!(b.get(0).r, 1);
        assert_eq!(b.n(0), 4);
        assert_eq!(b.to_string(), "u0: r=1 n=4\n");
    }

    #[test]
    fn two_high_variables_give_eight() {
        let a = ServiceAlphabet::new(["h", "l", "m"]).unwrap();
        let psi5 = T::Mfo(M::exists(
            "x",
            "h",
            M::pred("req", "h", "x").and(M::forall(
                "y",
                "h",
                M::pred("req", "h", "y").implies(M::eq("x", "y")),
            )),
        ))
        .globally();
        let b = bound_profile(&psi5, &a);
        assert_eq!((b.get(0).r, b.n(0)), (2, 8));
        assert_eq!((b.n(1), b.n(2)), (0, 0));
    }

    #[test]
    fn server_props_only() {
        let a = ServiceAlphabet::new(["h", "l"]).unwrap();
        let b = bound_profile(&T::prop("lp").globally(), &a);
        assert!(b.entries().iter().all(|e| e.r == 0 && e.n == 0));
    }

    #[test]
    fn reused_name_counts_once_fresh_name_counts_again() {
        let a = ServiceAlphabet::new(["u"]).unwrap();
        let base = T::Mfo(M::exists("x", "u", M::pred("req", "u", "x")));
        let reuse = base.clone().and(T::Mfo(M::exists("x", "u", M::pred("ans", "u", "x"))));
        let fresh = base.clone().and(T::Mfo(M::exists("y", "u", M::pred("ans", "u", "y"))));
        assert_eq!(bound_profile(&base, &a).get(0).r, 1);
        assert_eq!(bound_profile(&reuse, &a).get(0).r, 1);
        assert_eq!(bound_profile(&fresh, &a).get(0).r, 2);
    }
}
