use crate::expand::KripkeStructure;
use crate::ltl::{holds_on_lasso, LtlFormula};

use super::{deadlock_count, moves, unknown_atom_warnings, CheckError, Lasso, Move, Verdict};

/// Upper bound on path extensions explored before giving up.
const PATH_BUDGET: usize = 50_000_000;

/// Enumerates every lasso of `k` with stem length at most `stem_max` and
/// cycle length between 1 and `cycle_max`, ordered by stem length, then
/// cycle length, then lexicographically by (move, target), and evaluates
/// `phi` on each. Returns the first violating lasso. `holds` only means no
/// counterexample exists within the limits.
pub fn brute_force_check(
    k: &KripkeStructure,
    phi: &LtlFormula,
    stem_max: usize,
    cycle_max: usize,
) -> Result<Verdict, CheckError> {
    if k.initial().is_empty() {
        return Err(CheckError::EmptyInitial);
    }
    let mut initial = k.initial().to_vec();
    initial.sort();
    let mut search = Search {
        k,
        phi,
        budget: PATH_BUDGET,
        path: Vec::new(),
    };
    for stem in 0..=stem_max {
        for cycle in 1..=cycle_max {
            for &s in &initial {
                if let Some(lasso) = search.dfs(s, s, stem, stem + cycle)? {
                    return Ok(Verdict {
                        holds: false,
                        counterexample: Some(lasso),
                        deadlocks_completed: deadlock_count(k),
                        warnings: unknown_atom_warnings(k, phi),
                    });
                }
            }
        }
    }
    Ok(Verdict {
        holds: true,
        counterexample: None,
        deadlocks_completed: deadlock_count(k),
        warnings: unknown_atom_warnings(k, phi),
    })
}

struct Search<'a> {
    k: &'a KripkeStructure,
    phi: &'a LtlFormula,
    budget: usize,
    path: Vec<(Move, usize)>,
}

impl Search<'_> {
    fn dfs(
        &mut self,
        initial: usize,
        cur: usize,
        stem: usize,
        total: usize,
    ) -> Result<Option<Lasso>, CheckError> {
        if self.path.len() == total {
            let loop_state = if stem == 0 { initial } else { self.path[stem - 1].1 };
            if cur != loop_state {
                return Ok(None);
            }
            let lasso = Lasso {
                initial,
                stem: self.path[..stem].to_vec(),
                cycle: self.path[stem..].to_vec(),
            };
            let (s, c) = lasso.labels(self.k);
            return Ok((!holds_on_lasso(self.phi, &s, &c)).then_some(lasso));
        }
        for step in moves(self.k, cur) {
            if self.budget == 0 {
                return Err(CheckError::PathBudget(PATH_BUDGET));
            }
            self.budget -= 1;
            self.path.push(step);
            let found = self.dfs(initial, step.1, stem, total)?;
            self.path.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }
}
