use std::fmt;

use crate::model::ServiceAlphabet;

use super::{MfoFormula, MfstlFormula};

/// A reason a formula is not a well-formed specification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WfIssue {
    /// A client variable with no enclosing binder; in a temporal context this
    /// is exactly a variable that would have to cross a temporal operator.
    FreeVariable { var: String, atom: String },
    EqualityAcrossSorts {
        x: String,
        x_sort: String,
        y: String,
        y_sort: String,
    },
    UnknownType(String),
    PredicateSortMismatch {
        pred: String,
        var: String,
        var_sort: String,
    },
    /// An inner binder reuses a name already bound at a different sort.
    ShadowedAtDifferentSort {
        var: String,
        outer: String,
        inner: String,
    },
}

impl fmt::Display for WfIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WfIssue::FreeVariable { var, atom } => write!(
                f,
                "free variable `{var}` in `{atom}`: client variables must be bound inside their \
                 sentence and cannot range across temporal operators"
            ),
            WfIssue::EqualityAcrossSorts { x, x_sort, y, y_sort } => write!(
                f,
                "equality between `{x}` (sort {x_sort}) and `{y}` (sort {y_sort}) crosses sorts"
            ),
            WfIssue::UnknownType(t) => write!(f, "unknown client type `{t}`"),
            WfIssue::PredicateSortMismatch { pred, var, var_sort } => write!(
                f,
                "predicate `{pred}` applied to `{var}`, which is bound at sort {var_sort}"
            ),
            WfIssue::ShadowedAtDifferentSort { var, outer, inner } => write!(
                f,
                "variable `{var}` is rebound at sort {inner} inside its binding at sort {outer}"
            ),
        }
    }
}

/// Checks sentence-hood of every embedded MFO atom and sort discipline.
pub fn check_well_formed(
    formula: &MfstlFormula,
    alphabet: &ServiceAlphabet,
) -> Result<(), Vec<WfIssue>> {
    let mut issues = Vec::new();
    for atom in formula.mfo_atoms() {
        let mut scope: Vec<(String, String)> = Vec::new();
        check_mfo(atom, atom, alphabet, &mut scope, &mut issues);
    }
    issues.dedup();
    if issues.is_empty() {
        Ok(())
    } else {
        Err(issues)
    }
}

fn sort_of<'a>(scope: &'a [(String, String)], var: &str) -> Option<&'a str> {
    scope
        .iter()
        .rev()
        .find(|(v, _)| v == var)
        .map(|(_, s)| s.as_str())
}

fn known(alphabet: &ServiceAlphabet, sort: &str, issues: &mut Vec<WfIssue>) {
    if alphabet.index_of(sort).is_none() {
        let issue = WfIssue::UnknownType(sort.to_string());
        if !issues.contains(&issue) {
            issues.push(issue);
        }
    }
}

fn check_mfo(
    root: &MfoFormula,
    f: &MfoFormula,
    alphabet: &ServiceAlphabet,
    scope: &mut Vec<(String, String)>,
    issues: &mut Vec<WfIssue>,
) {
    match f {
        MfoFormula::Pred { sort, var, .. } => {
            known(alphabet, sort, issues);
            match sort_of(scope, var) {
                None => issues.push(WfIssue::FreeVariable {
                    var: var.clone(),
                    atom: f.to_string(),
                }),
                Some(s) if s != sort => issues.push(WfIssue::PredicateSortMismatch {
                    pred: f.to_string(),
                    var: var.clone(),
                    var_sort: s.to_string(),
                }),
                Some(_) => {}
            }
        }
        MfoFormula::Eq(x, y) => match (sort_of(scope, x), sort_of(scope, y)) {
            (Some(sx), Some(sy)) if sx != sy => issues.push(WfIssue::EqualityAcrossSorts {
                x: x.clone(),
                x_sort: sx.to_string(),
                y: y.clone(),
                y_sort: sy.to_string(),
            }),
            (sx, sy) => {
                for (v, s) in [(x, sx), (y, sy)] {
                    if s.is_none() {
                        issues.push(WfIssue::FreeVariable {
                            var: v.clone(),
                            atom: f.to_string(),
                        });
                    }
                }
            }
        },
        MfoFormula::Not(a) => check_mfo(root, a, alphabet, scope, issues),
        MfoFormula::Or(a, b) | MfoFormula::And(a, b) | MfoFormula::Implies(a, b) => {
            check_mfo(root, a, alphabet, scope, issues);
            check_mfo(root, b, alphabet, scope, issues);
        }
        MfoFormula::Exists { var, sort, body } | MfoFormula::Forall { var, sort, body } => {
            known(alphabet, sort, issues);
            if let Some(outer) = sort_of(scope, var) {
                if outer != sort {
                    issues.push(WfIssue::ShadowedAtDifferentSort {
                        var: var.clone(),
                        outer: outer.to_string(),
                        inner: sort.clone(),
                    });
                }
            }
            scope.push((var.clone(), sort.clone()));
            check_mfo(root, body, alphabet, scope, issues);
            scope.pop();
        }
    }
}
