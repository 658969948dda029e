use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::expand::AtBound;
use crate::ground::GroundingMap;
use crate::logic::BoundProfile;
use crate::ltl::LtlFormula;
use crate::model::{Action, Sps, StateId, TypeId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmitError {
    #[error("bound profile covers {found} client types, the system declares {expected}")]
    BoundsMismatch { expected: usize, found: usize },
    #[error("client type `{0}` is used by the system but its bound is 0")]
    ZeroBound(String),
}

/// Where an emitted variable comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Artifact {
    Input { values: Vec<String> },
    Location { states: Vec<String> },
    Counter { client_type: String, type_index: TypeId, bound: usize },
    RequestFlags { client_type: String, type_index: TypeId, bound: usize },
    AnswerFlags { client_type: String, type_index: TypeId, bound: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Manifest {
    /// Requests at the bound keep counters and request flags unchanged.
    pub at_bound: AtBound,
    pub artifacts: BTreeMap<String, Artifact>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmvDocument {
    pub text: String,
    pub manifest: Manifest,
}

/// ASCII rendering used for `LTLSPEC`.
pub fn render_ltl(f: &LtlFormula) -> String {
    f.render()
}

/// How inputs are written in guards.
struct InputEncoding {
    boolean: bool,
    sps_names: Vec<String>,
}

impl InputEncoding {
    fn value(&self, a: Action) -> String {
        if self.boolean {
            return match a {
                Action::Req(_) => "TRUE".into(),
                _ => "FALSE".into(),
            };
        }
        match a {
            Action::Tau => "tau".into(),
            Action::Req(t) => format!("req_{}", self.sps_names[t]),
            Action::Ans(t) => format!("ans_{}", self.sps_names[t]),
        }
    }
}

fn case_block(out: &mut String, target: &str, lines: &[(String, String)]) {
    let width = lines.iter().map(|(g, _)| g.len()).max().unwrap_or(0);
    let _ = writeln!(out, " next({target}):= case");
    for (guard, value) in lines {
        let _ = writeln!(out, "        {guard:<width$} : {value};");
    }
    out.push_str(" esac;\n");
}

fn set_or_single(items: &[String]) -> String {
    if items.len() == 1 {
        items[0].clone()
    } else {
        format!("{{{}}}", items.join(","))
    }
}

/// Emits the system as an SMV module with per-type request counters and
/// request/answer flag arrays, requests at the bound frozen, and `phi` as
/// the `LTLSPEC`. Server propositions in `phi` become location tests.
pub fn emit_smv(sps: &Sps, bounds: &BoundProfile, phi: &LtlFormula) -> Result<SmvDocument, EmitError> {
    let alphabet = sps.alphabet();
    if bounds.len() != alphabet.len() {
        return Err(EmitError::BoundsMismatch {
            expected: alphabet.len(),
            found: bounds.len(),
        });
    }
    for ty in sps.used_types() {
        if bounds.n(ty) == 0 {
            return Err(EmitError::ZeroBound(alphabet.name(ty).to_string()));
        }
    }
    let map = GroundingMap::new(bounds);
    let enc = InputEncoding {
        boolean: alphabet.len() == 1 && !sps.uses_tau(),
        sps_names: alphabet.names().to_vec(),
    };
    let mut actions = Vec::new();
    if sps.uses_tau() {
        actions.push(Action::Tau);
    }
    for ty in 0..alphabet.len() {
        actions.push(Action::Req(ty));
        actions.push(Action::Ans(ty));
    }
    let input_values: Vec<String> = if enc.boolean {
        vec!["FALSE".into(), "TRUE".into()]
    } else {
        actions.iter().map(|&a| enc.value(a)).collect()
    };

    let states = sps.states();
    let loc = |s: StateId| format!("loc={}", states[s]);
    // Input guard, restricted to locations enabling the action when needed.
    let enabled: BTreeMap<Action, BTreeSet<StateId>> = actions
        .iter()
        .map(|&a| {
            let at: BTreeSet<StateId> = sps
                .transitions()
                .iter()
                .filter(|t| t.action == a)
                .map(|t| t.from)
                .collect();
            (a, at)
        })
        .collect();
    let guard = |a: Action| -> Option<String> {
        let at = &enabled[&a];
        let ip = format!("ip={}", enc.value(a));
        if at.is_empty() {
            None
        } else if at.len() == states.len() {
            Some(ip)
        } else if at.len() == 1 {
            Some(format!("{ip} & {}", loc(*at.iter().next().unwrap())))
        } else {
            let alts: Vec<String> = at.iter().map(|&s| loc(s)).collect();
            Some(format!("{ip} & ({})", alts.join(" | ")))
        }
    };

    let emitted: Vec<TypeId> = (0..alphabet.len()).filter(|&t| bounds.n(t) > 0).collect();
    let mut manifest = Manifest {
        at_bound: AtBound::Freeze,
        artifacts: BTreeMap::new(),
    };
    manifest.artifacts.insert(
        "ip".into(),
        Artifact::Input {
            values: input_values.clone(),
        },
    );
    manifest.artifacts.insert(
        "loc".into(),
        Artifact::Location {
            states: states.to_vec(),
        },
    );

    let mut out = String::new();
    out.push_str("MODULE main\n");
    if enc.boolean {
        out.push_str("IVAR ip : boolean;\n");
    } else {
        let _ = writeln!(out, "IVAR ip : {{{}}};", input_values.join(","));
    }
    let _ = writeln!(out, "VAR loc : {{{}}};", states.join(","));
    for &t in &emitted {
        let n = bounds.n(t);
        let info = (alphabet.name(t).to_string(), t, n);
        let _ = writeln!(out, "VAR {}: 0..{n};", map.counter(t));
        let _ = writeln!(out, "VAR {} : array 1..{n} of boolean;", map.req_array(t));
        let _ = writeln!(out, "VAR {} : array 1..{n} of boolean;", map.ans_array(t));
        manifest.artifacts.insert(
            map.counter(t),
            Artifact::Counter {
                client_type: info.0.clone(),
                type_index: t,
                bound: n,
            },
        );
        manifest.artifacts.insert(
            map.req_array(t).to_string(),
            Artifact::RequestFlags {
                client_type: info.0.clone(),
                type_index: t,
                bound: n,
            },
        );
        manifest.artifacts.insert(
            map.ans_array(t).to_string(),
            Artifact::AnswerFlags {
                client_type: info.0,
                type_index: t,
                bound: n,
            },
        );
    }
    out.push_str("ASSIGN\n");
    let init: Vec<String> = sps.initial().iter().map(|&s| states[s].clone()).collect();
    let _ = writeln!(out, " init(loc):={};", set_or_single(&init));
    for &t in &emitted {
        let _ = writeln!(out, " init({}):=0;", map.counter(t));
        for arr in [map.req_array(t), map.ans_array(t)] {
            for j in 1..=bounds.n(t) {
                let _ = writeln!(out, " init({arr}[{j}]):=FALSE;");
            }
        }
    }

    let mut lines = Vec::new();
    for s in 0..states.len() {
        for &a in &actions {
            let targets: Vec<String> = sps
                .outgoing(s)
                .iter()
                .filter(|t| t.action == a)
                .map(|t| states[t.to].clone())
                .collect();
            if targets.is_empty() || targets == [states[s].clone()] {
                continue;
            }
            lines.push((format!("{} & ip={}", loc(s), enc.value(a)), set_or_single(&targets)));
        }
    }
    lines.push(("TRUE".into(), "loc".into()));
    case_block(&mut out, "loc", &lines);

    for &t in &emitted {
        let n = bounds.n(t);
        let ctr = map.counter(t);
        let req = guard(Action::Req(t));
        let ans = guard(Action::Ans(t));
        let mut lines = Vec::new();
        if let Some(g) = &req {
            lines.push((format!("{g} & {ctr}<{n}"), format!("{ctr} + 1")));
        }
        if let Some(g) = &ans {
            lines.push((format!("{g} & {ctr}>0"), format!("{ctr} - 1")));
        }
        lines.push(("TRUE".into(), ctr.clone()));
        case_block(&mut out, &ctr, &lines);

        let p = map.req_array(t);
        for j in 1..=n {
            let cell = format!("{p}[{j}]");
            let mut lines = Vec::new();
            if let Some(g) = &req {
                lines.push((format!("{cell}=FALSE & {g} & {ctr}={}", j - 1), "TRUE".into()));
            }
            if let Some(g) = &ans {
                lines.push((format!("{cell}=TRUE & {g} & {ctr}={j}"), "FALSE".into()));
            }
            lines.push(("TRUE".into(), cell.clone()));
            case_block(&mut out, &cell, &lines);
        }
        let q = map.ans_array(t);
        for j in 1..=n {
            let cell = format!("{q}[{j}]");
            let mut lines = Vec::new();
            if let Some(g) = &ans {
                lines.push((format!("{cell}=FALSE & {g} & {ctr}={j}"), "TRUE".into()));
            }
            lines.push((format!("{cell}=TRUE"), "FALSE".into()));
            lines.push(("TRUE".into(), cell.clone()));
            case_block(&mut out, &cell, &lines);
        }
    }

    let spec = localize(phi, sps, &map);
    let _ = write!(out, "\nLTLSPEC\n {}\n", render_ltl(&spec));
    Ok(SmvDocument {
        text: out,
        manifest,
    })
}

/// Rewrites server propositions into location tests and atoms that name no
/// emitted variable into `FALSE`, so the specification only mentions
/// declared variables.
pub fn localize(phi: &LtlFormula, sps: &Sps, map: &GroundingMap) -> LtlFormula {
    let flags = map.atoms();
    let props = sps.server_props();
    let go = |f: &LtlFormula| localize(f, sps, map);
    match phi {
        LtlFormula::True | LtlFormula::False => phi.clone(),
        LtlFormula::Atom(a) if flags.contains(a) => phi.clone(),
        LtlFormula::Atom(a) if props.contains(a.as_str()) => LtlFormula::any_of(
            (0..sps.states().len())
                .filter(|&s| sps.labels(s).contains(a))
                .map(|s| LtlFormula::atom(format!("loc={}", sps.state_name(s)))),
        ),
        LtlFormula::Atom(_) => LtlFormula::False,
        LtlFormula::Not(a) => go(a).not(),
        LtlFormula::And(v) => LtlFormula::And(v.iter().map(go).collect()),
        LtlFormula::Or(v) => LtlFormula::Or(v.iter().map(go).collect()),
        LtlFormula::Implies(a, b) => go(a).implies(go(b)),
        LtlFormula::Next(a) => go(a).next(),
        LtlFormula::Until(a, b) => go(a).until(go(b)),
        LtlFormula::Finally(a) => go(a).finally(),
        LtlFormula::Globally(a) => go(a).globally(),
    }
}
