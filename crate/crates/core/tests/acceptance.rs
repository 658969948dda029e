//! One PASS/FAIL line per acceptance criterion. Limits and tolerances are
//! pinned below; the process exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::process::Command;
use std::time::{Duration, Instant as Clock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{binder_count, fixture, golden, independent_check, load, load_spec, loan, read, PSI_FIXTURES};
use spsmc::checker::{brute_force_check, check, Lasso, Move};
use spsmc::expand::{expand, simulation_agreement, AtBound, KripkeStructure};
use spsmc::frontend::parse_mfstl;
use spsmc::ground::{ground_mfo, ground_mfstl, GroundingMap};
use spsmc::logic::{bound_profile, eval_mfo, BoundProfile, Instant, MfoFormula as M, TraceModel, Valuation};
use spsmc::model::{Action, ServiceAlphabet};

const LIMIT_BOUND: Duration = Duration::from_secs(1);
const LIMIT_GROUND: Duration = Duration::from_secs(1);
const LIMIT_SMV: Duration = Duration::from_secs(1);
const LIMIT_ORACLE: Duration = Duration::from_secs(10);
const LIMIT_ADEQUACY: Duration = Duration::from_secs(60);
const LIMIT_EXPANSION: Duration = Duration::from_secs(30);
const LIMIT_CORPUS: Duration = Duration::from_secs(5);
const LIMIT_DETERMINISM: Duration = Duration::from_secs(10);

const ORACLE_STEM_MAX: usize = 6;
const ORACLE_CYCLE_MAX: usize = 6;
const RANDOM_SENTENCES: usize = 500;
const RANDOM_SEED: u64 = 20_240_601;
const MAX_RANDOM_BOUND: usize = 4;
const SIMULATION_WORD_LENGTH: usize = 6;
const DETERMINISM_RUNS: usize = 10;

type Outcome = Result<String, String>;

fn spsmc(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_spsmc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(name: &str) -> String {
    fixture(name).display().to_string()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// `bound` on the two-state fixture prints r=1 n=4.
fn bound_reproduction() -> Outcome {
    let o = spsmc(&["bound", &path("two_state.spsml")]);
    let text = String::from_utf8_lossy(&o.stdout).into_owned();
    ensure(o.status.code() == Some(0), || format!("exit {:?}", o.status.code()))?;
    ensure(text == "u0: r=1 n=4\n", || format!("printed {text:?}"))?;
    Ok(text.trim().to_string())
}

/// Grounding `(Ex)p(x)` at n=4 gives the four-way disjunction.
fn grounding_reproduction() -> Outcome {
    let bounds = BoundProfile::from_bounds(&ServiceAlphabet::new(["u0"]).unwrap(), &[4]);
    let f = ground_mfo(&M::exists("x", "u0", M::pred("req", "u0", "x")), &bounds).map_err(|e| e.to_string())?;
    let text = f.render();
    ensure(text == "p[1] | p[2] | p[3] | p[4]", || format!("rendered {text:?}"))?;
    Ok(text)
}

fn strip_ws(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

/// Emitted SMV equals the hand-transcribed goldens byte for byte, and the
/// structural elements of the encoding are present.
fn smv_golden() -> Outcome {
    for (spec, gold) in [
        ("two_state.spsml", "two_state.smv"),
        ("two_state_no_x.spsml", "two_state_no_x.smv"),
    ] {
        let input = load(spec);
        let doc = input.emit_smv().map_err(|e| e.to_string())?;
        let expected = read(&golden(gold));
        ensure(doc.text == expected, || format!("{spec}: emitted text differs from {gold}"))?;
    }
    let text = read(&golden("two_state.smv"));
    ensure(text.contains("VAR ctr: 0..4;\n"), || "counter range".into())?;
    let blocks = (1..=4)
        .flat_map(|j| [format!(" next(p[{j}]):= case\n"), format!(" next(q[{j}]):= case\n")])
        .filter(|b| text.contains(b.as_str()))
        .count();
    ensure(blocks == 8, || format!("{blocks} of 8 flag blocks"))?;
    for j in 1..=4 {
        let guards = [
            format!("p[{j}]=FALSE & ip=TRUE & ctr={} : TRUE;", j - 1),
            format!("p[{j}]=TRUE & ip=FALSE & ctr={j} : FALSE;"),
            format!("q[{j}]=FALSE & ip=FALSE & ctr={j} : TRUE;"),
        ];
        for g in guards {
            ensure(text.contains(&g), || format!("missing guard {g:?}"))?;
        }
        let fall_p = format!("TRUE                         : p[{j}];");
        let pulse = format!("q[{j}]=TRUE                     : FALSE;");
        ensure(text.contains(&fall_p), || format!("missing fallthrough for p[{j}]"))?;
        ensure(text.contains(&pulse), || format!("missing q-pulse clear for q[{j}]"))?;
    }
    let no_x = read(&golden("two_state_no_x.smv"));
    let spec = no_x.split("LTLSPEC").nth(1).unwrap_or_default();
    ensure(
        strip_ws(spec) == "G((p[1]|p[2]|p[3]|p[4])->(q[1]|q[2]|q[3]|q[4]))",
        || format!("LTLSPEC {spec:?}"),
    )?;
    Ok("2 goldens byte-equal; ctr 0..4, 8 flag blocks, guards, fallthroughs, q-pulse".into())
}

fn describe_moves(lasso: &Lasso, k: &KripkeStructure) -> String {
    let show = |v: &[(Move, usize)]| v.iter().map(|&(m, _)| m.display(k)).collect::<Vec<_>>().join(" ");
    format!("stem [{}] cycle [{}]", show(&lasso.stem), show(&lasso.cycle))
}

/// Block mode, both spec variants: the checker and the lasso enumeration
/// agree, and the checker's counterexample starts with two requests.
fn checker_vs_oracle() -> Outcome {
    let mut notes = Vec::new();
    for spec in ["two_state.spsml", "two_state_no_x.spsml"] {
        let input = load(spec);
        let (bounds, ltl) = input.ground().map_err(|e| e.to_string())?;
        let k = expand(input.sps().unwrap(), &bounds, AtBound::Block).map_err(|e| e.to_string())?;
        let oracle = brute_force_check(&k, &ltl, ORACLE_STEM_MAX, ORACLE_CYCLE_MAX).map_err(|e| e.to_string())?;
        let verdict = check(&k, &ltl).map_err(|e| e.to_string())?;
        ensure(!oracle.holds, || format!("{spec}: oracle finds no violation"))?;
        ensure(verdict.holds == oracle.holds, || format!("{spec}: verdicts differ"))?;
        let cx = verdict.counterexample.as_ref().expect("violated verdicts carry a lasso");
        let ocx = oracle.counterexample.as_ref().expect("violated verdicts carry a lasso");
        let (stem, cycle) = cx.labels(&k);
        ensure(!spsmc::ltl::holds_on_lasso(&ltl, &stem, &cycle), || format!("{spec}: lasso satisfies the property"))?;
        ensure(cx.stem.len() <= ORACLE_STEM_MAX && cx.cycle.len() <= ORACLE_CYCLE_MAX, || {
            format!("{spec}: counterexample outside the oracle's limits")
        })?;
        let first: Vec<Move> = cx.moves().take(2).collect();
        let req = Move::Act(Action::Req(0));
        ensure(first == [req, req], || format!("{spec}: starts with {first:?}"))?;
        notes.push(format!(
            "{spec}: check {}; oracle {}",
            describe_moves(cx, &k),
            describe_moves(ocx, &k)
        ));
    }
    Ok(notes.join("; "))
}

/// Every flag assignment over `slots` (type, slot) pairs with at most one of
/// p/q set per slot, as the set of true atoms plus the matching instant.
fn assignments(types: &[(usize, String, usize)], map: &GroundingMap) -> Vec<(BTreeSet<String>, Instant)> {
    let slots: Vec<(usize, &str, usize)> = types
        .iter()
        .flat_map(|(t, name, n)| (1..=*n).map(move |j| (*t, name.as_str(), j)))
        .collect();
    let mut out = Vec::new();
    let total = 3usize.pow(slots.len() as u32);
    for code in 0..total {
        let (mut atoms, mut at, mut c) = (BTreeSet::new(), Instant::new(), code);
        for &(t, name, j) in &slots {
            let preds: &[&str] = match c % 3 {
                0 => &[],
                1 => {
                    atoms.insert(map.req_atom(t, j));
                    &["req"]
                }
                _ => {
                    atoms.insert(map.ans_atom(t, j));
                    &["ans"]
                }
            };
            at = at.with_client(name, j as u32, preds);
            c /= 3;
        }
        out.push((atoms, at));
    }
    out
}

fn sorts_of(f: &M, out: &mut BTreeSet<String>) {
    match f {
        M::Pred { sort, .. } => {
            out.insert(sort.clone());
        }
        M::Eq(..) => {}
        M::Not(a) => sorts_of(a, out),
        M::Or(a, b) | M::And(a, b) | M::Implies(a, b) => {
            sorts_of(a, out);
            sorts_of(b, out);
        }
        M::Exists { sort, body, .. } | M::Forall { sort, body, .. } => {
            out.insert(sort.clone());
            sorts_of(body, out);
        }
    }
}

/// Compares direct evaluation with the grounded formula on every assignment
/// over the slots of the sorts the sentence mentions. Returns the number of
/// assignments compared.
fn adequacy(f: &M, alphabet: &ServiceAlphabet, bounds: &BoundProfile) -> Result<usize, String> {
    let grounded = ground_mfo(f, bounds).map_err(|e| format!("{f}: {e}"))?;
    let map = GroundingMap::new(bounds);
    let mut sorts = BTreeSet::new();
    sorts_of(f, &mut sorts);
    let types: Vec<(usize, String, usize)> = sorts
        .iter()
        .map(|s| {
            let t = alphabet.index_of(s).expect("known sort");
            (t, s.clone(), bounds.n(t))
        })
        .collect();
    let cases = assignments(&types, &map);
    for (atoms, at) in &cases {
        let model = TraceModel::finite(vec![at.clone()]);
        let direct = eval_mfo(&model, &Valuation::new(), 0, f).map_err(|e| e.to_string())?;
        let ground = grounded.eval_prop(&|a| atoms.contains(a)).expect("propositional");
        if direct != ground {
            return Err(format!("{f}: direct {direct}, grounded {ground} on {atoms:?}"));
        }
    }
    Ok(cases.len())
}

/// Random sentence over sorts h, l with at most `quantifiers` binders.
fn random_sentence(rng: &mut ChaCha8Rng, quantifiers: usize) -> M {
    fn go(rng: &mut ChaCha8Rng, scope: &mut Vec<(String, String)>, q: &mut usize, depth: u32) -> M {
        let must_bind = scope.is_empty();
        if *q > 0 && (must_bind || rng.gen_bool(0.3)) {
            *q -= 1;
            let var = ["x", "y"][scope.len().min(1)].to_string();
            let sort = ["h", "l"][rng.gen_range(0..2)].to_string();
            scope.push((var.clone(), sort.clone()));
            let body = go(rng, scope, q, depth + 1);
            scope.pop();
            return if rng.gen_bool(0.5) {
                M::exists(&var, &sort, body)
            } else {
                M::forall(&var, &sort, body)
            };
        }
        if depth >= 4 || rng.gen_bool(0.4) {
            let (var, sort) = scope[rng.gen_range(0..scope.len())].clone();
            let same: Vec<&(String, String)> = scope.iter().filter(|(_, s)| *s == sort).collect();
            if same.len() > 1 && rng.gen_bool(0.3) {
                let other = &same[rng.gen_range(0..same.len())].0;
                return M::eq(&var, other);
            }
            let base = if rng.gen_bool(0.5) { "req" } else { "ans" };
            return M::pred(base, &sort, &var);
        }
        let a = go(rng, scope, q, depth + 1);
        match rng.gen_range(0..4) {
            0 => a.not(),
            1 => a.and(go(rng, scope, q, depth + 1)),
            2 => a.or(go(rng, scope, q, depth + 1)),
            _ => a.implies(go(rng, scope, q, depth + 1)),
        }
    }
    go(rng, &mut Vec::new(), &mut { quantifiers }, 0)
}

fn grounding_adequacy() -> Outcome {
    let mut corpus = 0;
    let mut compared = 0;
    let sps = loan();
    let mut specs = Vec::new();
    for name in PSI_FIXTURES {
        let input = load_spec(name, &sps).map_err(|e| format!("{name}: {e}"))?;
        specs.push((input.spec().unwrap().clone(), sps.alphabet().clone()));
    }
    for name in ["two_state.spsml", "two_state_no_x.spsml"] {
        let input = load(name);
        specs.push((input.spec().unwrap().clone(), input.doc.alphabet.clone()));
    }
    for (spec, alphabet) in &specs {
        let bounds = bound_profile(spec, alphabet);
        for atom in spec.mfo_atoms() {
            compared += adequacy(atom, alphabet, &bounds)?;
            corpus += 1;
        }
    }
    let alphabet = ServiceAlphabet::new(["h", "l"]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_SEED);
    for _ in 0..RANDOM_SENTENCES {
        let q = rng.gen_range(1..=2);
        let f = random_sentence(&mut rng, q);
        let n = [rng.gen_range(1..=MAX_RANDOM_BOUND), rng.gen_range(1..=MAX_RANDOM_BOUND)];
        compared += adequacy(&f, &alphabet, &BoundProfile::from_bounds(&alphabet, &n))?;
    }
    Ok(format!(
        "{corpus} corpus sentences and {RANDOM_SENTENCES} random sentences, {compared} assignments, 0 mismatches"
    ))
}

fn expansion_invariants() -> Outcome {
    let two = load("two_state.spsml");
    let (two_bounds, _) = two.ground().map_err(|e| e.to_string())?;
    let sps = loan();
    // Componentwise maximum of the per-formula bounds, at least 4 per type.
    let mut loan_n = vec![4; sps.alphabet().len()];
    for name in PSI_FIXTURES {
        let b = load_spec(name, &sps).unwrap().bounds().unwrap();
        for (t, n) in loan_n.iter_mut().enumerate() {
            *n = (*n).max(b.n(t));
        }
    }
    let cases = [
        ("two_state", two.sps().unwrap().clone(), two_bounds),
        ("loan 4,4,4", sps.clone(), BoundProfile::from_bounds(sps.alphabet(), &[4, 4, 4])),
        ("loan corpus max", sps.clone(), BoundProfile::from_bounds(sps.alphabet(), &loan_n)),
    ];
    let mut states = 0;
    for (name, sps, bounds) in &cases {
        for mode in [AtBound::Block, AtBound::Freeze] {
            let k = expand(sps, bounds, mode).map_err(|e| e.to_string())?;
            states += k.len();
            let mut issues = k.invariant_violations();
            issues.extend(independent_check(&k));
            if mode == AtBound::Block {
                issues.extend(simulation_agreement(&k, SIMULATION_WORD_LENGTH));
            }
            ensure(issues.is_empty(), || format!("{name} {mode:?}: {}", issues[0]))?;
        }
    }
    Ok(format!(
        "{} structures, {states} states, words up to length {SIMULATION_WORD_LENGTH}, 0 violations",
        cases.len() * 2
    ))
}

fn corpus_health() -> Outcome {
    let sps = loan();
    let mut notes = Vec::new();
    for name in PSI_FIXTURES {
        let input = load_spec(name, &sps).map_err(|e| format!("{name}: {e}"))?;
        let bounds = input.bounds().map_err(|e| e.to_string())?;
        let counted = binder_count(&read(&fixture(&format!("{name}.mfstl"))));
        for e in bounds.entries() {
            let r = counted.get(&e.ty).copied().unwrap_or(0);
            ensure(e.n == 4 * r, || format!("{name}: n_{} = {}, counted r = {r}", e.ty, e.n))?;
        }
        ground_mfstl(input.spec().unwrap(), &bounds).map_err(|e| format!("{name}: {e}"))?;
        if name == "psi5" {
            let h = bounds.by_name("h").unwrap().n;
            ensure(h == 8, || format!("psi5: n_h = {h}"))?;
            notes.push(format!("psi5 n_h={h}"));
        }
    }
    let text = read(&fixture("inexpressible.mfstl"));
    let errs = parse_mfstl(&text, &ServiceAlphabet::new(["u"]).unwrap()).err().unwrap_or_default();
    ensure(errs.iter().any(|d| d.message.starts_with("free variable `x`")), || {
        format!("inexpressible sample gave {errs:?}")
    })?;
    notes.push(format!("inexpressible rejected at {}:{}", errs[0].span.start_line, errs[0].span.start_col));
    Ok(format!("{} specifications parse, type-check and ground; {}", PSI_FIXTURES.len(), notes.join(", ")))
}

fn determinism() -> Outcome {
    let runs: [Vec<String>; 4] = [
        vec!["check".into(), path("two_state.spsml")],
        vec!["check".into(), path("two_state_no_x.spsml"), "--format".into(), "json".into()],
        vec!["ground".into(), path("two_state.spsml")],
        vec!["emit-smv".into(), path("two_state.spsml")],
    ];
    for args in &runs {
        let refs: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = spsmc(&refs);
        for _ in 1..DETERMINISM_RUNS {
            let again = spsmc(&refs);
            ensure(again.stdout == first.stdout && again.status == first.status, || {
                format!("{} output changed between runs", args[0])
            })?;
        }
    }
    Ok(format!("{} commands x {DETERMINISM_RUNS} runs byte-identical", runs.len()))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 8] = [
        ("bound reproduction", LIMIT_BOUND, bound_reproduction),
        ("grounding reproduction", LIMIT_GROUND, grounding_reproduction),
        ("SMV golden", LIMIT_SMV, smv_golden),
        ("checker vs oracle", LIMIT_ORACLE, checker_vs_oracle),
        ("grounding adequacy", LIMIT_ADEQUACY, grounding_adequacy),
        ("expansion invariants", LIMIT_EXPANSION, expansion_invariants),
        ("corpus health", LIMIT_CORPUS, corpus_health),
        ("determinism", LIMIT_DETERMINISM, determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Clock::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(note) if took > *limit => Err(format!("{note}; over the time limit")),
            other => other,
        };
        let (status, note) = match &outcome {
            Ok(n) => ("PASS", n),
            Err(n) => ("FAIL", n),
        };
        if outcome.is_err() {
            failed += 1;
        }
        println!(
            "criterion {} ({name}): {status} in {:.3}s (limit {}s): {note}",
            i + 1,
            took.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
