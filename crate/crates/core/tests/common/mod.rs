#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use spsmc::frontend::{parse_sps, SourceKind};
use spsmc::expand::{AtBound, Flag, FlagKind, InterpretedState, KripkeStructure};
use spsmc::model::{Action, Sps};
use spsmc::pipeline::Input;

pub const PSI_FIXTURES: [&str; 9] = [
    "psi0", "psi1", "psi2", "psi3", "psi4", "psi5", "psi6", "phi_h2", "psi5_stable",
];

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("golden").join(name)
}

pub fn read(path: &PathBuf) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub fn load(name: &str) -> Input {
    Input::load(&fixture(name), None).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn loan() -> Sps {
    parse_sps(&read(&fixture("loan.sps"))).expect("loan fixture parses").0
}

pub fn load_spec(name: &str, model: &Sps) -> Result<Input, spsmc::Error> {
    let text = read(&fixture(&format!("{name}.mfstl")));
    Input::from_text(&text, SourceKind::Spec, Some(model))
}

/// Distinct variable names per sort, read off the binders in the source
/// text: every `(E v:s)` / `(A v:s)` contributes `v` to `s`.
pub fn binder_count(text: &str) -> BTreeMap<String, usize> {
    let mut vars: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut rest = text;
    while let Some(i) = rest.find(['E', 'A']) {
        let after = &rest[i + 1..];
        if rest[..i].ends_with('(') {
            if let Some(close) = after.find(')') {
                if let Some((v, s)) = after[..close].split_once(':') {
                    vars.entry(s.trim().into()).or_default().insert(v.trim().into());
                }
            }
        }
        rest = after;
    }
    vars.into_iter().map(|(s, v)| (s, v.len())).collect()
}

/// Successor under the slot semantics, written out independently of the
/// expansion: requests fill slot `c+1`, answers move slot `c` from request
/// to answer, and every step drops the previous answer flags.
pub fn step(s: &InterpretedState, a: Action, to: usize, bounds: &[usize], at_bound: AtBound) -> Option<InterpretedState> {
    let mut t = s.clone();
    t.state = to;
    t.flags.retain(|f| f.kind == FlagKind::Req);
    match a {
        Action::Tau => {}
        Action::Req(ty) => {
            let c = t.counters[ty];
            if c as usize == bounds[ty] {
                if at_bound == AtBound::Block {
                    return None;
                }
            } else {
                t.counters[ty] = c + 1;
                t.flags.insert(Flag::req(ty, c + 1));
            }
        }
        Action::Ans(ty) => {
            let c = t.counters[ty];
            if c == 0 {
                return None;
            }
            t.flags.remove(&Flag::req(ty, c));
            t.flags.insert(Flag::ans(ty, c));
            t.counters[ty] = c - 1;
        }
    }
    Some(t)
}

pub fn independent_check(k: &KripkeStructure) -> Vec<String> {
    let sps = k.sps();
    let mut issues = Vec::new();
    for id in 0..k.len() {
        let s = k.state(id);
        let expected: BTreeSet<(Action, InterpretedState)> = sps
            .outgoing(s.state)
            .iter()
            .filter_map(|t| step(s, t.action, t.to, k.bounds(), k.at_bound()).map(|n| (t.action, n)))
            .collect();
        let actual: BTreeSet<(Action, InterpretedState)> =
            k.successors(id).iter().map(|&(a, t)| (a, k.state(t).clone())).collect();
        if expected != actual {
            issues.push(format!("successors of {} differ", k.describe(id)));
        }
        let mut label: BTreeSet<String> = sps.labels(s.state).clone();
        label.extend(s.flags.iter().map(|f| f.atom(k.grounding())));
        if &label != k.label(id) {
            issues.push(format!("label of {} differs", k.describe(id)));
        }
    }
    issues
}
