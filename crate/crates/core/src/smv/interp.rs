//! Explicit-state semantics of a parsed module: one step reads an input
//! valuation, evaluates every `next` expression in the current state, and
//! takes all combinations of the resulting values.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::expand::{AtBound, Flag, InterpretedState, KripkeStructure};
use crate::model::Action;

use super::syntax::{CmpOp, Expr, SmvModule, VarType};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Sym(String),
}

pub type SmvState = BTreeMap<String, Value>;
pub type Input = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpError {
    #[error("no case arm applies in `{0}`")]
    NoCaseMatched(String),
    #[error("type error: {0}")]
    Type(String),
    #[error("value {value:?} outside the domain of `{cell}`")]
    OutOfDomain { cell: String, value: Value },
    #[error("state exploration exceeds {0} states")]
    Capacity(usize),
}

fn domain(ty: &VarType) -> Vec<Value> {
    match ty {
        VarType::Boolean | VarType::BoolArray(..) => vec![Value::Bool(false), Value::Bool(true)],
        VarType::Enum(v) => v.iter().map(|s| Value::Sym(s.clone())).collect(),
        VarType::Range(lo, hi) => (*lo..=*hi).map(Value::Int).collect(),
    }
}

struct Env<'a> {
    state: &'a SmvState,
    input: &'a Input,
}

impl Env<'_> {
    fn lookup(&self, key: &str) -> Option<&Value> {
        self.state.get(key).or_else(|| self.input.get(key))
    }

    fn eval_set(&self, e: &Expr) -> Result<Vec<Value>, InterpError> {
        match e {
            Expr::Set(items) => {
                let mut out = BTreeSet::new();
                for x in items {
                    out.extend(self.eval_set(x)?);
                }
                Ok(out.into_iter().collect())
            }
            Expr::Case(arms) => {
                for (g, v) in arms {
                    if self.eval_bool(g)? {
                        return self.eval_set(v);
                    }
                }
                Err(InterpError::NoCaseMatched(format!("{e:?}")))
            }
            _ => Ok(vec![self.eval(e)?]),
        }
    }

    fn eval_bool(&self, e: &Expr) -> Result<bool, InterpError> {
        match self.eval(e)? {
            Value::Bool(b) => Ok(b),
            v => Err(InterpError::Type(format!("expected a boolean, got {v:?}"))),
        }
    }

    fn eval_int(&self, e: &Expr) -> Result<i64, InterpError> {
        match self.eval(e)? {
            Value::Int(i) => Ok(i),
            v => Err(InterpError::Type(format!("expected an integer, got {v:?}"))),
        }
    }

    fn eval(&self, e: &Expr) -> Result<Value, InterpError> {
        Ok(match e {
            Expr::Bool(b) => Value::Bool(*b),
            Expr::Int(i) => Value::Int(*i),
            Expr::Ident(n) => self
                .lookup(n)
                .cloned()
                .unwrap_or_else(|| Value::Sym(n.clone())),
            Expr::Elem(n, i) => self
                .lookup(&format!("{n}[{i}]"))
                .cloned()
                .ok_or_else(|| InterpError::Type(format!("no cell {n}[{i}]")))?,
            Expr::Not(a) => Value::Bool(!self.eval_bool(a)?),
            Expr::And(a, b) => Value::Bool(self.eval_bool(a)? && self.eval_bool(b)?),
            Expr::Or(a, b) => Value::Bool(self.eval_bool(a)? || self.eval_bool(b)?),
            Expr::Add(a, b) => Value::Int(self.eval_int(a)? + self.eval_int(b)?),
            Expr::Sub(a, b) => Value::Int(self.eval_int(a)? - self.eval_int(b)?),
            Expr::Cmp(op, a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                let ord = match (&x, &y) {
                    (Value::Int(i), Value::Int(j)) => i.cmp(j),
                    _ if matches!(op, CmpOp::Eq | CmpOp::Ne) => {
                        if std::mem::discriminant(&x) != std::mem::discriminant(&y) {
                            return Err(InterpError::Type(format!("comparing {x:?} with {y:?}")));
                        }
                        return Ok(Value::Bool((x == y) == (*op == CmpOp::Eq)));
                    }
                    _ => return Err(InterpError::Type(format!("ordering {x:?} and {y:?}"))),
                };
                Value::Bool(match op {
                    CmpOp::Eq => ord.is_eq(),
                    CmpOp::Ne => ord.is_ne(),
                    CmpOp::Lt => ord.is_lt(),
                    CmpOp::Le => ord.is_le(),
                    CmpOp::Gt => ord.is_gt(),
                    CmpOp::Ge => ord.is_ge(),
                })
            }
            Expr::Set(_) | Expr::Case(_) => {
                let mut v = self.eval_set(e)?;
                if v.len() != 1 {
                    return Err(InterpError::Type("set used as a single value".into()));
                }
                v.pop().unwrap()
            }
        })
    }
}

fn product(choices: Vec<(String, Vec<Value>)>) -> Vec<SmvState> {
    let mut out = vec![SmvState::new()];
    for (cell, values) in choices {
        let mut next = Vec::with_capacity(out.len() * values.len());
        for s in &out {
            for v in &values {
                let mut t = s.clone();
                t.insert(cell.clone(), v.clone());
                next.push(t);
            }
        }
        out = next;
    }
    out
}

impl SmvModule {
    /// All valuations of the input variables.
    pub fn inputs(&self) -> Vec<Input> {
        product(self.ivars.iter().map(|(n, t)| (n.clone(), domain(t))).collect())
    }

    fn step(&self, assigns: &[(super::syntax::Target, Expr)], env: &Env) -> Result<Vec<SmvState>, InterpError> {
        let mut choices = Vec::new();
        for (cell, ty) in self.cells() {
            let dom = domain(&ty);
            let values = match assigns.iter().find(|(t, _)| t.key() == cell) {
                Some((_, e)) => {
                    let vals = env.eval_set(e)?;
                    if let Some(bad) = vals.iter().find(|v| !dom.contains(v)) {
                        return Err(InterpError::OutOfDomain {
                            cell,
                            value: bad.clone(),
                        });
                    }
                    vals
                }
                None => dom,
            };
            choices.push((cell, values));
        }
        let mut out = product(choices);
        out.sort();
        out.dedup();
        Ok(out)
    }

    pub fn initial_states(&self) -> Result<Vec<SmvState>, InterpError> {
        let (s, i) = (SmvState::new(), Input::new());
        self.step(&self.inits, &Env { state: &s, input: &i })
    }

    pub fn successors(&self, state: &SmvState, input: &Input) -> Result<Vec<SmvState>, InterpError> {
        self.step(&self.nexts, &Env { state, input })
    }
}

/// Reads the input valuation of an emitted module back as an action.
fn decode_input(k: &KripkeStructure, input: &Input) -> Option<Action> {
    let alphabet = k.sps().alphabet();
    match input.get("ip")? {
        Value::Bool(true) => Some(Action::Req(0)),
        Value::Bool(false) => Some(Action::Ans(0)),
        Value::Sym(s) if s == "tau" => Some(Action::Tau),
        Value::Sym(s) => {
            let (kind, ty) = s.split_once('_')?;
            let ty = alphabet.index_of(ty)?;
            match kind {
                "req" => Some(Action::Req(ty)),
                "ans" => Some(Action::Ans(ty)),
                _ => None,
            }
        }
        Value::Int(_) => None,
    }
}

fn to_interpreted(k: &KripkeStructure, s: &SmvState) -> Option<InterpretedState> {
    let map = k.grounding();
    let loc = match s.get("loc")? {
        Value::Sym(name) => k.sps().state_id(name).ok()?,
        _ => return None,
    };
    let mut out = InterpretedState::initial(loc, k.bounds().len());
    for (t, &n) in k.bounds().iter().enumerate() {
        if n == 0 {
            continue;
        }
        match s.get(&map.counter(t))? {
            Value::Int(c) => out.counters[t] = *c as u32,
            _ => return None,
        }
        for j in 1..=n {
            if s.get(&format!("{}[{j}]", map.req_array(t))) == Some(&Value::Bool(true)) {
                out.flags.insert(Flag::req(t, j as u32));
            }
            if s.get(&format!("{}[{j}]", map.ans_array(t))) == Some(&Value::Bool(true)) {
                out.flags.insert(Flag::ans(t, j as u32));
            }
        }
    }
    Some(out)
}

/// Explores the module from its initial states, taking only inputs the
/// server system can perform at the current location (answers additionally
/// need a pending request), and compares the resulting graph with the
/// freeze-mode expansion `k`. Returns one message per difference.
pub fn agreement_with_expansion(
    m: &SmvModule,
    k: &KripkeStructure,
    max_states: usize,
) -> Result<Vec<String>, InterpError> {
    let mut issues = Vec::new();
    if k.at_bound() != AtBound::Freeze {
        issues.push("the expansion does not use freeze-at-bound".to_string());
    }
    let inputs = m.inputs();
    let mut seen: BTreeMap<SmvState, InterpretedState> = BTreeMap::new();
    let mut queue = VecDeque::new();
    let mut edges = BTreeSet::new();
    let mut initial = BTreeSet::new();
    let convert = |s: &SmvState, issues: &mut Vec<String>| match to_interpreted(k, s) {
        Some(i) => Some(i),
        None => {
            issues.push(format!("cannot read state {s:?}"));
            None
        }
    };
    for s in m.initial_states()? {
        if let Some(i) = convert(&s, &mut issues) {
            initial.insert(i.clone());
            seen.insert(s.clone(), i);
            queue.push_back(s);
        }
    }
    while let Some(s) = queue.pop_front() {
        let src = seen[&s].clone();
        for input in &inputs {
            let Some(a) = decode_input(k, input) else {
                issues.push(format!("cannot read input {input:?}"));
                continue;
            };
            let enabled = k.sps().outgoing(src.state).iter().any(|t| t.action == a)
                && !matches!(a, Action::Ans(t) if src.counters[t] == 0);
            if !enabled {
                continue;
            }
            for t in m.successors(&s, input)? {
                if !seen.contains_key(&t) {
                    if seen.len() >= max_states {
                        return Err(InterpError::Capacity(max_states));
                    }
                    let Some(i) = convert(&t, &mut issues) else { continue };
                    seen.insert(t.clone(), i);
                    queue.push_back(t.clone());
                }
                edges.insert((src.clone(), a, seen[&t].clone()));
            }
        }
    }
    let k_initial: BTreeSet<InterpretedState> =
        k.initial().iter().map(|&i| k.state(i).clone()).collect();
    let k_edges: BTreeSet<(InterpretedState, Action, InterpretedState)> = k
        .transitions()
        .map(|(f, a, t)| (k.state(f).clone(), a, k.state(t).clone()))
        .collect();
    let smv_states: BTreeSet<&InterpretedState> = seen.values().collect();
    let k_states: BTreeSet<&InterpretedState> = k.states().iter().collect();
    if initial != k_initial {
        issues.push("initial states differ".into());
    }
    for s in smv_states.symmetric_difference(&k_states) {
        let side = if k_states.contains(s) { "expansion" } else { "module" };
        issues.push(format!("state only in the {side}: {s:?}"));
    }
    for e in edges.symmetric_difference(&k_edges) {
        let side = if k_edges.contains(e) { "expansion" } else { "module" };
        issues.push(format!("transition only in the {side}: {e:?}"));
    }
    Ok(issues)
}
