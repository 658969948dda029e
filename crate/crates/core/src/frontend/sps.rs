use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::logic::MfstlFormula;
use crate::model::{Action, ServiceAlphabet, Sps, SpsBuilder};

use super::lexer::{lex, Cursor, TokKind};
use super::mfstl;
use super::{Diagnostic, Parsed, Span};

type Named = (String, Span);

#[derive(Debug)]
enum RawAction {
    Tau,
    Req(Option<Named>),
    Ans(Option<Named>),
}

#[derive(Debug, Default)]
struct Raw {
    types: Option<(Vec<Named>, Span)>,
    states: Option<(Vec<Named>, Span)>,
    init: Option<(Vec<Named>, Span)>,
    finals: Option<(Vec<Named>, Span)>,
    labels: Vec<(Named, Vec<Named>)>,
    trans: Vec<(Named, RawAction, Named, Span)>,
}

fn name_list(c: &mut Cursor, allow_empty: bool) -> Result<Vec<Named>, Diagnostic> {
    let mut out = Vec::new();
    if c.is_sym(";") && allow_empty {
        return Ok(out);
    }
    out.push(c.expect_ident("a name")?);
    while c.is_sym(",") {
        c.pos += 1;
        out.push(c.expect_ident("a name")?);
    }
    Ok(out)
}

fn action(c: &mut Cursor) -> Result<RawAction, Diagnostic> {
    let (word, span) = c.expect_ident("`req`, `ans` or `tau`")?;
    let client = |c: &mut Cursor| -> Result<Option<Named>, Diagnostic> {
        if !c.is_sym("(") {
            return Ok(None);
        }
        c.pos += 1;
        let t = c.expect_ident("a client type")?;
        c.expect_sym(")")?;
        Ok(Some(t))
    };
    match word.as_str() {
        "tau" => Ok(RawAction::Tau),
        "req" => Ok(RawAction::Req(client(c)?)),
        "ans" => Ok(RawAction::Ans(client(c)?)),
        _ => Err(Diagnostic::error(
            span,
            format!("unknown action `{word}` (expected `req`, `ans` or `tau`)"),
        )),
    }
}

fn set_once(
    slot: &mut Option<(Vec<Named>, Span)>,
    value: Vec<Named>,
    span: Span,
    keyword: &str,
    diags: &mut Vec<Diagnostic>,
) {
    if slot.is_some() {
        diags.push(Diagnostic::error(span, format!("`{keyword}` declared more than once")));
    } else {
        *slot = Some((value, span));
    }
}

/// Reads statements until end of input or, when `stop_at_spec`, the
/// `MFSTLSPEC` keyword.
fn statements(c: &mut Cursor, stop_at_spec: bool, diags: &mut Vec<Diagnostic>) -> Raw {
    let mut raw = Raw::default();
    while !c.at_end() {
        if stop_at_spec && c.is_ident("MFSTLSPEC") {
            break;
        }
        let start = c.span();
        let result = (|| -> Result<(), Diagnostic> {
            let (kw, kw_span) = c.expect_ident("a section keyword")?;
            match kw.as_str() {
                "types" | "states" | "init" | "final" => {
                    let list = name_list(c, kw == "init" || kw == "final")?;
                    c.expect_sym(";")?;
                    let slot = match kw.as_str() {
                        "types" => &mut raw.types,
                        "states" => &mut raw.states,
                        "init" => &mut raw.init,
                        _ => &mut raw.finals,
                    };
                    set_once(slot, list, start.to(c.prev_span()), &kw, diags);
                }
                "labels" => {
                    let state = c.expect_ident("a state name")?;
                    c.expect_sym(":")?;
                    let props = name_list(c, false)?;
                    c.expect_sym(";")?;
                    raw.labels.push((state, props));
                }
                "trans" => {
                    let from = c.expect_ident("a state name")?;
                    c.expect_sym("-")?;
                    let a = action(c)?;
                    c.expect_sym("->")?;
                    let to = c.expect_ident("a state name")?;
                    c.expect_sym(";")?;
                    raw.trans.push((from, a, to, start.to(c.prev_span())));
                }
                "MFSTLSPEC" => {
                    return Err(Diagnostic::error(
                        kw_span,
                        "`MFSTLSPEC` is only allowed in combined (.spsml) files",
                    ))
                }
                _ => {
                    return Err(Diagnostic::error(
                        kw_span,
                        format!(
                            "unknown section `{kw}` (expected types, states, init, final, labels or trans)"
                        ),
                    ))
                }
            }
            Ok(())
        })();
        if let Err(d) = result {
            diags.push(d);
            // Resynchronize after the next `;`.
            while !c.at_end() && !c.is_sym(";") {
                c.pos += 1;
            }
            c.pos += 1;
        }
    }
    raw
}

fn resolve(raw: Raw, whole: Span, diags: &mut Vec<Diagnostic>) -> Option<Sps> {
    let Some((types, types_span)) = raw.types else {
        diags.push(Diagnostic::error(whole, "missing `types` declaration"));
        return None;
    };
    let Some((states, _)) = raw.states else {
        diags.push(Diagnostic::error(whole, "missing `states` declaration"));
        return None;
    };
    let mut seen = BTreeSet::new();
    for (t, span) in &types {
        if !seen.insert(t.clone()) {
            diags.push(Diagnostic::error(*span, format!("client type `{t}` declared twice")));
        }
    }
    let mut declared = BTreeSet::new();
    for (s, span) in &states {
        if !declared.insert(s.clone()) {
            diags.push(Diagnostic::error(*span, format!("state `{s}` declared twice")));
        }
    }
    let alphabet = match ServiceAlphabet::new(types.iter().map(|(t, _)| t.clone())) {
        Ok(a) => a,
        Err(e) => {
            diags.push(Diagnostic::error(types_span, e.to_string()));
            return None;
        }
    };
    let state_ok = |(s, span): &Named, diags: &mut Vec<Diagnostic>| {
        let ok = declared.contains(s);
        if !ok {
            diags.push(Diagnostic::error(*span, format!("undeclared state `{s}`")));
        }
        ok
    };

    let mut b = SpsBuilder::new(alphabet.clone());
    for (s, _) in &states {
        b = b.state(s);
    }
    match &raw.init {
        Some((list, span)) if list.is_empty() => {
            diags.push(Diagnostic::error(*span, "empty initial state set"));
        }
        None => diags.push(Diagnostic::error(whole, "empty initial state set: missing `init`")),
        Some((list, _)) => {
            for n in list {
                if state_ok(n, diags) {
                    b = b.initial(&n.0);
                }
            }
        }
    }
    if let Some((list, _)) = &raw.finals {
        b = b.with_final_states();
        for n in list {
            if state_ok(n, diags) {
                b = b.final_state(&n.0);
            }
        }
    }
    for (state, props) in &raw.labels {
        if state_ok(state, diags) {
            for (p, _) in props {
                b = b.label(&state.0, p);
            }
        }
    }
    let mut seen_trans: BTreeMap<(String, Action, String), Span> = BTreeMap::new();
    for (from, a, to, span) in &raw.trans {
        let ok_from = state_ok(from, diags);
        let ok_to = state_ok(to, diags);
        let ty = |client: &Option<Named>, diags: &mut Vec<Diagnostic>| match client {
            Some((t, tspan)) => {
                let found = alphabet.index_of(t);
                if found.is_none() {
                    diags.push(Diagnostic::error(*tspan, format!("undeclared client type `{t}`")));
                }
                found
            }
            None => {
                let found = alphabet.single();
                if found.is_none() {
                    diags.push(Diagnostic::error(
                        *span,
                        "client type required: several client types are declared",
                    ));
                }
                found
            }
        };
        let action = match a {
            RawAction::Tau => Some(Action::Tau),
            RawAction::Req(c) => ty(c, diags).map(Action::Req),
            RawAction::Ans(c) => ty(c, diags).map(Action::Ans),
        };
        let (Some(action), true, true) = (action, ok_from, ok_to) else {
            continue;
        };
        let key = (from.0.clone(), action, to.0.clone());
        if let Some(first) = seen_trans.get(&key) {
            diags.push(Diagnostic::warning(
                *span,
                format!(
                    "duplicate transition `{} -{}-> {}` (first at line {})",
                    from.0,
                    action.display(&alphabet),
                    to.0,
                    first.start_line
                ),
            ));
            continue;
        }
        seen_trans.insert(key, *span);
        b = b.transition(&from.0, action, &to.0);
    }
    if diags.iter().any(Diagnostic::is_error) {
        return None;
    }
    match b.build() {
        Ok(sps) => Some(sps),
        Err(e) => {
            diags.push(Diagnostic::error(whole, e.to_string()));
            None
        }
    }
}

fn finish<T>(value: Option<T>, diags: Vec<Diagnostic>) -> Parsed<T> {
    match value {
        Some(v) if !diags.iter().any(Diagnostic::is_error) => Ok((v, diags)),
        _ => Err(diags),
    }
}

/// Parses the server-system language:
/// `types h, l; states s0, s1; init s0; final s0; labels s0: idle;
/// trans s0 -req(h)-> s1; trans s1 -tau-> s1;` in any order.
pub fn parse_sps(text: &str) -> Parsed<Sps> {
    let toks = lex(text).map_err(|d| vec![d])?;
    let mut c = Cursor::new(toks, text);
    let whole = Span::new(1, 1, c.eof.end_line, c.eof.end_col);
    let mut diags = Vec::new();
    let raw = statements(&mut c, false, &mut diags);
    let sps = resolve(raw, whole, &mut diags);
    finish(sps, diags)
}

/// A system followed by exactly one `MFSTLSPEC` section.
pub fn parse_combined(text: &str) -> Parsed<(Sps, MfstlFormula)> {
    let toks = lex(text).map_err(|d| vec![d])?;
    let mut c = Cursor::new(toks, text);
    let whole = Span::new(1, 1, c.eof.end_line, c.eof.end_col);
    let mut diags = Vec::new();
    let raw = statements(&mut c, true, &mut diags);
    if c.at_end() {
        diags.push(Diagnostic::error(c.eof, "missing `MFSTLSPEC` section"));
        return Err(diags);
    }
    let spec_kw = c.span();
    c.pos += 1;
    if let Some(second) = c.toks[c.pos..].iter().find(|t| t.kind == TokKind::Ident("MFSTLSPEC".into())) {
        diags.push(Diagnostic::error(second.span, "more than one `MFSTLSPEC` section"));
    }
    let sps = resolve(raw, whole, &mut diags);
    let Some(sps) = sps else {
        return Err(diags);
    };
    match mfstl::parse_from(&mut c, sps.alphabet(), spec_kw) {
        Ok((spec, mut warnings)) => {
            diags.append(&mut warnings);
            finish(Some((sps, spec)), diags)
        }
        Err(mut errs) => {
            diags.append(&mut errs);
            Err(diags)
        }
    }
}

/// Canonical text of a system; parsing it yields an equal value.
pub fn render_sps(sps: &Sps) -> String {
    let alphabet = sps.alphabet();
    let mut out = String::new();
    let _ = writeln!(out, "types {};", alphabet.names().join(", "));
    let _ = writeln!(out, "states {};", sps.states().join(", "));
    let names = |set: &BTreeSet<usize>| -> Vec<&str> {
        set.iter().map(|&s| sps.state_name(s)).collect()
    };
    let _ = writeln!(out, "init {};", names(sps.initial()).join(", "));
    if let Some(f) = sps.final_states() {
        let _ = writeln!(out, "final {};", names(f).join(", "));
    }
    for s in 0..sps.states().len() {
        let props: Vec<&str> = sps.labels(s).iter().map(String::as_str).collect();
        if !props.is_empty() {
            let _ = writeln!(out, "labels {}: {};", sps.state_name(s), props.join(", "));
        }
    }
    for t in sps.transitions() {
        let _ = writeln!(
            out,
            "trans {} -{}-> {};",
            sps.state_name(t.from),
            t.action.display(alphabet),
            sps.state_name(t.to)
        );
    }
    out
}
