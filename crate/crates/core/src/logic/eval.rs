use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{MfoFormula, MfstlFormula};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("variable `{0}` is not bound by any quantifier")]
    UnboundVariable(String),
    #[error("variable `{var}` is bound at sort `{bound}` but used at sort `{used}`")]
    SortMismatch {
        var: String,
        bound: String,
        used: String,
    },
    #[error("finite trace cannot decide an infinite-horizon operator")]
    InfiniteHorizon,
    #[error("`X` at position {0} looks past the end of a finite trace")]
    BeyondHorizon(usize),
    #[error("position {0} is outside the finite trace")]
    OutOfRange(usize),
    #[error("trace model has no positions")]
    EmptyModel,
    #[error("lasso loop start {loop_start} is not below trace length {len}")]
    BadLoop { loop_start: usize, len: usize },
}

/// One position of a trace model: server propositions, and per client type the
/// live clients with the predicates each satisfies.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Instant {
    pub props: BTreeSet<String>,
    /// type name -> client index -> predicate bases true of that client.
    /// The key set of the inner map is the domain of the type at this instant.
    pub clients: BTreeMap<String, BTreeMap<u32, BTreeSet<String>>>,
}

impl Instant {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_prop(mut self, prop: &str) -> Self {
        self.props.insert(prop.to_string());
        self
    }

    /// Adds client `index` of type `ty` to the domain, satisfying `preds`.
    pub fn with_client(mut self, ty: &str, index: u32, preds: &[&str]) -> Self {
        self.clients
            .entry(ty.to_string())
            .or_default()
            .insert(index, preds.iter().map(|p| p.to_string()).collect());
        self
    }

    pub fn domain(&self, ty: &str) -> impl Iterator<Item = u32> + '_ {
        self.clients
            .get(ty)
            .into_iter()
            .flat_map(|m| m.keys().copied())
    }

    fn holds(&self, ty: &str, index: u32, base: &str) -> bool {
        self.clients
            .get(ty)
            .and_then(|m| m.get(&index))
            .is_some_and(|preds| preds.contains(base))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// A finite prefix: only boolean structure and `X` inside the prefix are
    /// meaningful.
    Finite,
    /// An infinite, ultimately periodic model: after the last instant the trace
    /// continues at `loop_start`.
    Lasso { loop_start: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceModel {
    pub instants: Vec<Instant>,
    pub shape: Shape,
}

impl TraceModel {
    pub fn finite(instants: Vec<Instant>) -> Self {
        TraceModel {
            instants,
            shape: Shape::Finite,
        }
    }

    pub fn lasso(instants: Vec<Instant>, loop_start: usize) -> Self {
        TraceModel {
            instants,
            shape: Shape::Lasso { loop_start },
        }
    }

    pub fn len(&self) -> usize {
        self.instants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instants.is_empty()
    }

    fn validate(&self) -> Result<(), EvalError> {
        if self.instants.is_empty() {
            return Err(EvalError::EmptyModel);
        }
        if let Shape::Lasso { loop_start } = self.shape {
            if loop_start >= self.instants.len() {
                return Err(EvalError::BadLoop {
                    loop_start,
                    len: self.instants.len(),
                });
            }
        }
        Ok(())
    }

    /// Maps an unbounded position onto the stored instants.
    pub fn resolve(&self, i: usize) -> Result<usize, EvalError> {
        let len = self.instants.len();
        if i < len {
            return Ok(i);
        }
        match self.shape {
            Shape::Finite => Err(EvalError::OutOfRange(i)),
            Shape::Lasso { loop_start } => {
                let cycle = len - loop_start;
                Ok(loop_start + (i - loop_start) % cycle)
            }
        }
    }
}

/// Partial map from variables to clients, each tagged with its sort.
pub type Valuation = BTreeMap<String, (String, u32)>;

pub fn eval_mfo(
    model: &TraceModel,
    valuation: &Valuation,
    i: usize,
    formula: &MfoFormula,
) -> Result<bool, EvalError> {
    model.validate()?;
    let at = &model.instants[model.resolve(i)?];
    let mut val = valuation.clone();
    mfo_at(at, &mut val, formula)
}

fn lookup<'a>(val: &'a Valuation, var: &str) -> Result<&'a (String, u32), EvalError> {
    val.get(var)
        .ok_or_else(|| EvalError::UnboundVariable(var.to_string()))
}

pub(crate) fn mfo_at(
    at: &Instant,
    val: &mut Valuation,
    formula: &MfoFormula,
) -> Result<bool, EvalError> {
    Ok(match formula {
        MfoFormula::Pred { base, sort, var } => {
            let (bound, client) = lookup(val, var)?;
            if bound != sort {
                return Err(EvalError::SortMismatch {
                    var: var.clone(),
                    bound: bound.clone(),
                    used: sort.clone(),
                });
            }
            // Membership in the domain is part of the predicate's truth.
            at.holds(sort, *client, base)
        }
        MfoFormula::Eq(x, y) => lookup(val, x)? == lookup(val, y)?,
        MfoFormula::Not(a) => !mfo_at(at, val, a)?,
        MfoFormula::Or(a, b) => mfo_at(at, val, a)? || mfo_at(at, val, b)?,
        MfoFormula::And(a, b) => mfo_at(at, val, a)? && mfo_at(at, val, b)?,
        MfoFormula::Implies(a, b) => !mfo_at(at, val, a)? || mfo_at(at, val, b)?,
        MfoFormula::Exists { var, sort, body } => quantify(at, val, var, sort, body, true)?,
        MfoFormula::Forall { var, sort, body } => quantify(at, val, var, sort, body, false)?,
    })
}

fn quantify(
    at: &Instant,
    val: &mut Valuation,
    var: &str,
    sort: &str,
    body: &MfoFormula,
    existential: bool,
) -> Result<bool, EvalError> {
    let saved = val.get(var).cloned();
    let mut result = !existential;
    for client in at.domain(sort).collect::<Vec<_>>() {
        val.insert(var.to_string(), (sort.to_string(), client));
        let b = mfo_at(at, val, body);
        match b {
            Ok(b) if b == existential => {
                result = existential;
                break;
            }
            Ok(_) => {}
            Err(e) => {
                restore(val, var, saved);
                return Err(e);
            }
        }
    }
    restore(val, var, saved);
    Ok(result)
}

fn restore(val: &mut Valuation, var: &str, saved: Option<(String, u32)>) {
    match saved {
        Some(v) => {
            val.insert(var.to_string(), v);
        }
        None => {
            val.remove(var);
        }
    }
}

pub fn eval_mfstl(model: &TraceModel, i: usize, formula: &MfstlFormula) -> Result<bool, EvalError> {
    model.validate()?;
    let i = model.resolve(i)?;
    mfstl_at(model, i, formula)
}

fn mfstl_at(model: &TraceModel, i: usize, formula: &MfstlFormula) -> Result<bool, EvalError> {
    Ok(match formula {
        MfstlFormula::True => true,
        MfstlFormula::False => false,
        MfstlFormula::Prop(p) => model.instants[i].props.contains(p),
        MfstlFormula::Mfo(a) => mfo_at(&model.instants[i], &mut Valuation::new(), a)?,
        MfstlFormula::Not(a) => !mfstl_at(model, i, a)?,
        MfstlFormula::Or(a, b) => mfstl_at(model, i, a)? || mfstl_at(model, i, b)?,
        MfstlFormula::And(a, b) => mfstl_at(model, i, a)? && mfstl_at(model, i, b)?,
        MfstlFormula::Implies(a, b) => !mfstl_at(model, i, a)? || mfstl_at(model, i, b)?,
        MfstlFormula::Next(a) => {
            if model.shape == Shape::Finite && i + 1 >= model.len() {
                return Err(EvalError::BeyondHorizon(i));
            }
            mfstl_at(model, model.resolve(i + 1)?, a)?
        }
        MfstlFormula::Until(a, b) => until(model, i, Some(a), b)?,
        MfstlFormula::Finally(b) => until(model, i, None, b)?,
        MfstlFormula::Globally(a) => {
            let neg = MfstlFormula::Not(a.clone());
            !until(model, i, None, &neg)?
        }
    })
}

/// `lhs U rhs` at `i` (with `lhs = TRUE` when absent). On a lasso, every
/// position reachable from `i` shows up within `len` steps, so the scan stops
/// there.
fn until(
    model: &TraceModel,
    i: usize,
    lhs: Option<&MfstlFormula>,
    rhs: &MfstlFormula,
) -> Result<bool, EvalError> {
    if model.shape == Shape::Finite {
        return Err(EvalError::InfiniteHorizon);
    }
    for k in i..=i + model.len() {
        let j = model.resolve(k)?;
        if mfstl_at(model, j, rhs)? {
            return Ok(true);
        }
        if let Some(lhs) = lhs {
            if !mfstl_at(model, j, lhs)? {
                return Ok(false);
            }
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::MfoFormula as M;
    use crate::logic::MfstlFormula as T;
    use proptest::prelude::*;

    fn sentence(a: &M) -> Result<bool, EvalError> {
        let model = TraceModel::finite(vec![Instant::new()]);
        eval_mfo(&model, &Valuation::new(), 0, a)
    }

    #[test]
    fn existential_over_singleton_domain() {
        let at = Instant::new().with_client("u", 1, &["p"]);
        let model = TraceModel::finite(vec![at]);
        let f = M::exists("x", "u", M::pred("p", "u", "x"));
        assert!(eval_mfo(&model, &Valuation::new(), 0, &f).unwrap());
    }

    #[test]
    fn empty_domain_quantifiers() {
        let ex = M::exists("x", "u", M::pred("p", "u", "x"));
        let all = M::forall("x", "u", M::pred("p", "u", "x"));
        assert!(!sentence(&ex).unwrap());
        assert!(sentence(&all).unwrap());
    }

    fn exactly_one_high() -> M {
        M::exists(
            "x",
            "h",
            M::pred("req", "h", "x").and(M::forall(
                "y",
                "h",
                M::pred("req", "h", "y").implies(M::eq("x", "y")),
            )),
        )
    }

    #[test]
    fn exactly_one_fails_with_two_requests() {
        let at = Instant::new()
            .with_client("h", 1, &["req"])
            .with_client("h", 2, &["req"]);
        let f = exactly_one_high();
        // Brute force: no witness x such that every requesting y equals x.
        let dom = [1u32, 2];
        let brute = dom.iter().any(|&x| dom.iter().all(|&y| y == x));
        assert!(!brute);
        let model = TraceModel::finite(vec![at]);
        assert_eq!(eval_mfo(&model, &Valuation::new(), 0, &f).unwrap(), brute);
    }

    #[test]
    fn predicate_outside_domain_is_false() {
        let model = TraceModel::finite(vec![Instant::new().with_client("u", 1, &["p"])]);
        let mut val = Valuation::new();
        val.insert("x".into(), ("u".into(), 7));
        assert!(!eval_mfo(&model, &val, 0, &M::pred("p", "u", "x")).unwrap());
    }

    #[test]
    fn unbound_variable_is_an_error() {
        assert_eq!(
            sentence(&M::pred("p", "u", "x")),
            Err(EvalError::UnboundVariable("x".into()))
        );
    }

    #[test]
    fn equality_ignores_domain_membership() {
        let model = TraceModel::finite(vec![Instant::new()]);
        let mut val = Valuation::new();
        val.insert("x".into(), ("u".into(), 3));
        val.insert("y".into(), ("u".into(), 3));
        assert!(eval_mfo(&model, &val, 0, &M::eq("x", "y")).unwrap());
    }

    #[test]
    fn no_pending_requests_initially() {
        let psi0 = T::Mfo(
            M::exists("x", "h", M::pred("req", "h", "x"))
                .or(M::exists("x", "l", M::pred("req", "l", "x")))
                .or(M::exists("x", "m", M::pred("req", "m", "x")))
                .not(),
        );
        let model = TraceModel::lasso(
            vec![
                Instant::new(),
                Instant::new().with_client("h", 1, &["req"]),
            ],
            1,
        );
        assert!(eval_mfstl(&model, 0, &psi0).unwrap());
        assert!(!eval_mfstl(&model, 1, &psi0).unwrap());
    }

    #[test]
    fn globally_true_on_lassos() {
        let model = TraceModel::lasso(vec![Instant::new(), Instant::new()], 0);
        assert!(eval_mfstl(&model, 0, &T::True.globally()).unwrap());
    }

    #[test]
    fn always_some_client_single_state_lasso() {
        let model = TraceModel::lasso(vec![Instant::new().with_client("u", 1, &["p"])], 0);
        let some = T::Mfo(M::exists("x", "u", M::pred("p", "u", "x")));
        assert!(eval_mfstl(&model, 0, &some.clone().globally()).unwrap());
        assert!(!eval_mfstl(&model, 0, &some.not().finally()).unwrap());
    }

    #[test]
    fn finite_models_reject_infinite_horizon() {
        let model = TraceModel::finite(vec![Instant::new(), Instant::new().with_prop("a")]);
        assert_eq!(
            eval_mfstl(&model, 0, &T::prop("a").finally()),
            Err(EvalError::InfiniteHorizon)
        );
        assert!(eval_mfstl(&model, 0, &T::prop("a").next()).unwrap());
        assert_eq!(
            eval_mfstl(&model, 1, &T::prop("a").next()),
            Err(EvalError::BeyondHorizon(1))
        );
    }

    #[test]
    fn lasso_positions_wrap() {
        let model = TraceModel::lasso(
            vec![
                Instant::new(),
                Instant::new().with_prop("a"),
                Instant::new(),
            ],
            1,
        );
        assert_eq!(model.resolve(3).unwrap(), 1);
        assert_eq!(model.resolve(6).unwrap(), 2);
        let gfa = T::prop("a").finally().globally();
        assert!(eval_mfstl(&model, 0, &gfa).unwrap());
        assert!(!eval_mfstl(&model, 0, &T::prop("a").globally()).unwrap());
        let bad = TraceModel::lasso(vec![Instant::new()], 3);
        assert!(matches!(
            eval_mfstl(&bad, 0, &T::True),
            Err(EvalError::BadLoop { .. })
        ));
    }

    // ---- randomized properties ----

    fn arb_instant() -> impl Strategy<Value = Instant> {
        (
            prop::collection::btree_map(1u32..4, (any::<bool>(), any::<bool>()), 0..4),
            any::<bool>(),
        )
            .prop_map(|(clients, a)| {
                let mut at = Instant::new();
                if a {
                    at = at.with_prop("a");
                }
                for (i, (req, ans)) in clients {
                    let mut preds = vec![];
                    if req {
                        preds.push("req");
                    }
                    if ans {
                        preds.push("ans");
                    }
                    at = at.with_client("u", i, &preds);
                }
                at
            })
    }

    fn arb_lasso() -> impl Strategy<Value = TraceModel> {
        prop::collection::vec(arb_instant(), 1..5).prop_flat_map(|v| {
            let n = v.len();
            (Just(v), 0..n).prop_map(|(v, l)| TraceModel::lasso(v, l))
        })
    }

    /// Random MFO sentence over sort `u` using variables from a pool.
    fn arb_mfo(depth: u32) -> BoxedStrategy<M> {
        let vars = prop::sample::select(vec!["x", "y", "z"]);
        let leaf = prop_oneof![
            (vars.clone(), prop::sample::select(vec!["req", "ans"]))
                .prop_map(|(v, b)| M::pred(b, "u", v)),
            (vars.clone(), vars.clone()).prop_map(|(a, b)| M::eq(a, b)),
        ];
        leaf.prop_recursive(depth, 16, 2, move |inner| {
            let vars = prop::sample::select(vec!["x", "y", "z"]);
            prop_oneof![
                inner.clone().prop_map(M::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.and(b)),
                (vars.clone(), inner.clone()).prop_map(|(v, b)| M::exists(v, "u", b)),
                (vars, inner).prop_map(|(v, b)| M::forall(v, "u", b)),
            ]
        })
        .boxed()
    }

    fn close(f: M) -> M {
        let mut out = f.clone();
        for v in f.free_vars() {
            out = M::exists(&v, "u", out);
        }
        out
    }

    fn rename_bound(f: &M, map: &mut Vec<(String, String)>, fresh: &mut usize) -> M {
        let find = |map: &Vec<(String, String)>, v: &str| {
            map.iter()
                .rev()
                .find(|(a, _)| a == v)
                .map(|(_, b)| b.clone())
                .unwrap_or_else(|| v.to_string())
        };
        match f {
            M::Pred { base, sort, var } => M::Pred {
                base: base.clone(),
                sort: sort.clone(),
                var: find(map, var),
            },
            M::Eq(x, y) => M::Eq(find(map, x), find(map, y)),
            M::Not(a) => rename_bound(a, map, fresh).not(),
            M::Or(a, b) => rename_bound(a, map, fresh).or(rename_bound(b, map, fresh)),
            M::And(a, b) => rename_bound(a, map, fresh).and(rename_bound(b, map, fresh)),
            M::Implies(a, b) => {
                rename_bound(a, map, fresh).implies(rename_bound(b, map, fresh))
            }
            M::Exists { var, sort, body } | M::Forall { var, sort, body } => {
                *fresh += 1;
                let new = format!("v{fresh}");
                map.push((var.clone(), new.clone()));
                let b = rename_bound(body, map, fresh);
                map.pop();
                if matches!(f, M::Exists { .. }) {
                    M::exists(&new, sort, b)
                } else {
                    M::forall(&new, sort, b)
                }
            }
        }
    }

    fn arb_mfstl() -> impl Strategy<Value = T> {
        let leaf = prop_oneof![
            Just(T::prop("a")),
            Just(T::True),
            arb_mfo(2).prop_map(|f| T::Mfo(close(f))),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(T::not),
                inner.clone().prop_map(T::next),
                inner.clone().prop_map(T::finally),
                inner.clone().prop_map(T::globally),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.or(b)),
                (inner.clone(), inner).prop_map(|(a, b)| a.until(b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn alpha_renaming_preserves_truth(f in arb_mfo(4), at in arb_instant()) {
            let f = close(f);
            let g = rename_bound(&f, &mut Vec::new(), &mut 0);
            let model = TraceModel::finite(vec![at]);
            prop_assert_eq!(
                eval_mfo(&model, &Valuation::new(), 0, &f).unwrap(),
                eval_mfo(&model, &Valuation::new(), 0, &g).unwrap()
            );
        }

        #[test]
        fn mfo_negation_flips(f in arb_mfo(4), at in arb_instant()) {
            let f = close(f);
            let model = TraceModel::finite(vec![at]);
            let v = eval_mfo(&model, &Valuation::new(), 0, &f).unwrap();
            prop_assert_eq!(eval_mfo(&model, &Valuation::new(), 0, &f.not()).unwrap(), !v);
        }

        #[test]
        fn forall_is_dual_of_exists(f in arb_mfo(3), at in arb_instant()) {
            let body = close(f);
            let model = TraceModel::finite(vec![at]);
            let all = M::forall("w", "u", body.clone());
            let dual = M::exists("w", "u", body.not()).not();
            prop_assert_eq!(
                eval_mfo(&model, &Valuation::new(), 0, &all).unwrap(),
                eval_mfo(&model, &Valuation::new(), 0, &dual).unwrap()
            );
        }

        #[test]
        fn mfstl_negation_flips(f in arb_mfstl(), m in arb_lasso()) {
            for i in 0..m.len() {
                let v = eval_mfstl(&m, i, &f).unwrap();
                prop_assert_eq!(eval_mfstl(&m, i, &f.clone().not()).unwrap(), !v);
            }
        }

        #[test]
        fn finally_matches_unrolled_window(f in arb_mfstl(), m in arb_lasso()) {
            let Shape::Lasso { loop_start } = m.shape else { unreachable!() };
            let cycle = m.len() - loop_start;
            let window = loop_start + 2 * cycle;
            for i in 0..m.len() {
                let direct = (i..window).any(|j| eval_mfstl(&m, j, &f).unwrap());
                prop_assert_eq!(eval_mfstl(&m, i, &f.clone().finally()).unwrap(), direct);
                let via_until = eval_mfstl(&m, i, &T::True.until(f.clone())).unwrap();
                prop_assert_eq!(via_until, direct);
            }
        }
    }
}
