//! Server automata over request/answer/silent actions and their unbounded
//! configuration semantics.
//!
//! An [`Sps`] is a finite transition system whose transitions mention client
//! *types* rather than client names. Its runs move through an infinite space of
//! [`Configuration`]s: a request of type `u` activates the least inactive client
//! of that type, an answer retires the least active one, and an answer with no
//! active client of its type blocks.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Index of a client type in its [`ServiceAlphabet`].
pub type TypeId = usize;
/// Index of a server state in [`Sps::states`] (states are kept sorted by name).
pub type StateId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("service alphabet must declare at least one client type")]
    EmptyAlphabet,
    #[error("client type `{0}` declared twice")]
    DuplicateType(String),
    #[error("unknown client type `{0}`")]
    UnknownType(String),
    #[error("client type index {0} is out of range")]
    TypeOutOfRange(TypeId),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state index {0} is out of range")]
    StateOutOfRange(StateId),
    #[error("configuration tracks {found} client types, alphabet has {expected}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("client index 0 is not a valid client name (indices start at 1)")]
    ZeroClientIndex,
    #[error("at least one initial state is required")]
    EmptyInitial,
    #[error("no final states declared; acceptance is undefined")]
    NoFinalStates,
    #[error("cannot parse action `{0}`")]
    BadAction(String),
}

/// The ordered, duplicate-free list of client types.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ServiceAlphabet {
    types: Vec<String>,
}

impl ServiceAlphabet {
    pub fn new<I, S>(types: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let types: Vec<String> = types.into_iter().map(Into::into).collect();
        if types.is_empty() {
            return Err(ModelError::EmptyAlphabet);
        }
        let mut seen = BTreeSet::new();
        for t in &types {
            if !seen.insert(t.as_str()) {
                return Err(ModelError::DuplicateType(t.clone()));
            }
        }
        Ok(ServiceAlphabet { types })
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<TypeId> {
        self.types.iter().position(|t| t == name)
    }

    pub fn name(&self, ty: TypeId) -> &str {
        &self.types[ty]
    }

    pub fn names(&self) -> &[String] {
        &self.types
    }

    /// The sole type when the alphabet has exactly one.
    pub fn single(&self) -> Option<TypeId> {
        (self.types.len() == 1).then_some(0)
    }
}

/// A letter of the extended alphabet.
///
/// The derived order (`Tau < Req < Ans`, then type index) is the canonical
/// exploration order used everywhere output must be reproducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Action {
    Tau,
    Req(TypeId),
    Ans(TypeId),
}

impl Action {
    pub fn client_type(self) -> Option<TypeId> {
        match self {
            Action::Tau => None,
            Action::Req(t) | Action::Ans(t) => Some(t),
        }
    }

    pub fn display(self, alphabet: &ServiceAlphabet) -> String {
        match self {
            Action::Tau => "tau".to_string(),
            Action::Req(t) => format!("req({})", alphabet.name(t)),
            Action::Ans(t) => format!("ans({})", alphabet.name(t)),
        }
    }

    /// Parses `tau`, `req(h)` or `ans(h)`.
    pub fn parse(text: &str, alphabet: &ServiceAlphabet) -> Result<Action, ModelError> {
        let s = text.trim();
        if s == "tau" {
            return Ok(Action::Tau);
        }
        let bad = || ModelError::BadAction(s.to_string());
        let (kind, rest) = s.split_once('(').ok_or_else(bad)?;
        let ty_name = rest.strip_suffix(')').ok_or_else(bad)?.trim();
        let ty = alphabet
            .index_of(ty_name)
            .ok_or_else(|| ModelError::UnknownType(ty_name.to_string()))?;
        match kind.trim() {
            "req" => Ok(Action::Req(ty)),
            "ans" => Ok(Action::Ans(ty)),
            _ => Err(bad()),
        }
    }

    fn check(self, alphabet: &ServiceAlphabet) -> Result<(), ModelError> {
        match self.client_type() {
            Some(t) if t >= alphabet.len() => Err(ModelError::TypeOutOfRange(t)),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub from: StateId,
    pub action: Action,
    pub to: StateId,
}

/// A service for passive clients: states, a transition relation over the
/// extended alphabet, initial states, optional final states and per-state
/// server propositions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sps {
    alphabet: ServiceAlphabet,
    states: Vec<String>,
    transitions: Vec<Transition>,
    initial: BTreeSet<StateId>,
    final_states: Option<BTreeSet<StateId>>,
    labels: Vec<BTreeSet<String>>,
}

/// Collects an [`Sps`] by state name; validation happens in [`SpsBuilder::build`].
#[derive(Debug, Clone)]
pub struct SpsBuilder {
    alphabet: ServiceAlphabet,
    states: BTreeSet<String>,
    transitions: Vec<(String, Action, String)>,
    initial: BTreeSet<String>,
    final_states: Option<BTreeSet<String>>,
    labels: BTreeMap<String, BTreeSet<String>>,
}

impl SpsBuilder {
    pub fn new(alphabet: ServiceAlphabet) -> Self {
        SpsBuilder {
            alphabet,
            states: BTreeSet::new(),
            transitions: Vec::new(),
            initial: BTreeSet::new(),
            final_states: None,
            labels: BTreeMap::new(),
        }
    }

    pub fn state(mut self, name: &str) -> Self {
        self.states.insert(name.to_string());
        self
    }

    pub fn initial(mut self, name: &str) -> Self {
        self.initial.insert(name.to_string());
        self
    }

    pub fn final_state(mut self, name: &str) -> Self {
        self.final_states
            .get_or_insert_with(BTreeSet::new)
            .insert(name.to_string());
        self
    }

    /// Declares the final-state set as present, possibly empty.
    pub fn with_final_states(mut self) -> Self {
        self.final_states.get_or_insert_with(BTreeSet::new);
        self
    }

    pub fn label(mut self, state: &str, prop: &str) -> Self {
        self.labels
            .entry(state.to_string())
            .or_default()
            .insert(prop.to_string());
        self
    }

    pub fn transition(mut self, from: &str, action: Action, to: &str) -> Self {
        self.transitions
            .push((from.to_string(), action, to.to_string()));
        self
    }

    pub fn build(self) -> Result<Sps, ModelError> {
        let states: Vec<String> = self.states.into_iter().collect();
        let id = |name: &str| -> Result<StateId, ModelError> {
            states
                .binary_search_by(|s| s.as_str().cmp(name))
                .map_err(|_| ModelError::UnknownState(name.to_string()))
        };
        let mut transitions = Vec::with_capacity(self.transitions.len());
        for (from, action, to) in &self.transitions {
            action.check(&self.alphabet)?;
            transitions.push(Transition {
                from: id(from)?,
                action: *action,
                to: id(to)?,
            });
        }
        transitions.sort();
        transitions.dedup();
        let initial = self
            .initial
            .iter()
            .map(|s| id(s))
            .collect::<Result<BTreeSet<_>, _>>()?;
        if initial.is_empty() {
            return Err(ModelError::EmptyInitial);
        }
        let final_states = match &self.final_states {
            Some(f) => Some(f.iter().map(|s| id(s)).collect::<Result<BTreeSet<_>, _>>()?),
            None => None,
        };
        let mut labels = vec![BTreeSet::new(); states.len()];
        for (state, props) in self.labels {
            labels[id(&state)?] = props;
        }
        Ok(Sps {
            alphabet: self.alphabet,
            states,
            transitions,
            initial,
            final_states,
            labels,
        })
    }
}

impl Sps {
    pub fn alphabet(&self) -> &ServiceAlphabet {
        &self.alphabet
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_id(&self, name: &str) -> Result<StateId, ModelError> {
        self.states
            .binary_search_by(|s| s.as_str().cmp(name))
            .map_err(|_| ModelError::UnknownState(name.to_string()))
    }

    pub fn state_name(&self, id: StateId) -> &str {
        &self.states[id]
    }

    /// All transitions, sorted by `(from, action, to)`.
    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn initial(&self) -> &BTreeSet<StateId> {
        &self.initial
    }

    pub fn final_states(&self) -> Option<&BTreeSet<StateId>> {
        self.final_states.as_ref()
    }

    pub fn labels(&self, state: StateId) -> &BTreeSet<String> {
        &self.labels[state]
    }

    /// Every server proposition mentioned by some state.
    pub fn server_props(&self) -> BTreeSet<&str> {
        self.labels
            .iter()
            .flat_map(|l| l.iter().map(String::as_str))
            .collect()
    }

    /// Outgoing transitions of `state`, in canonical order.
    pub fn outgoing(&self, state: StateId) -> &[Transition] {
        let lo = self.transitions.partition_point(|t| t.from < state);
        let hi = self.transitions.partition_point(|t| t.from <= state);
        &self.transitions[lo..hi]
    }

    /// Client types mentioned by at least one transition.
    pub fn used_types(&self) -> BTreeSet<TypeId> {
        self.transitions
            .iter()
            .filter_map(|t| t.action.client_type())
            .collect()
    }

    pub fn uses_tau(&self) -> bool {
        self.transitions.iter().any(|t| t.action == Action::Tau)
    }

    pub fn initial_configurations(&self) -> Vec<Configuration> {
        self.initial
            .iter()
            .map(|&s| Configuration::empty(s, self.alphabet.len()))
            .collect()
    }

    fn validate(&self, c: &Configuration) -> Result<(), ModelError> {
        if c.state >= self.states.len() {
            return Err(ModelError::StateOutOfRange(c.state));
        }
        if c.active.len() != self.alphabet.len() {
            return Err(ModelError::ArityMismatch {
                expected: self.alphabet.len(),
                found: c.active.len(),
            });
        }
        if c.active.iter().any(|set| set.contains(&0)) {
            return Err(ModelError::ZeroClientIndex);
        }
        Ok(())
    }

    /// Successors of `c` under `action`: one per matching transition. An empty
    /// result means the step is blocked, which is not an error.
    pub fn step(
        &self,
        c: &Configuration,
        action: Action,
    ) -> Result<BTreeSet<Configuration>, ModelError> {
        self.validate(c)?;
        action.check(&self.alphabet)?;
        Ok(self.step_unchecked(c, action).collect())
    }

    fn step_unchecked<'a>(
        &'a self,
        c: &'a Configuration,
        action: Action,
    ) -> impl Iterator<Item = Configuration> + 'a {
        let active = apply_to_active(&c.active, action);
        self.outgoing(c.state)
            .iter()
            .filter(move |t| t.action == action)
            .filter_map(move |t| {
                active.as_ref().map(|a| Configuration {
                    state: t.to,
                    active: a.clone(),
                })
            })
    }

    /// All `(action, successor)` pairs of `c` in canonical order.
    pub fn successors(&self, c: &Configuration) -> Vec<(Action, Configuration)> {
        let mut out = Vec::new();
        for t in self.outgoing(c.state) {
            if let Some(active) = apply_to_active(&c.active, t.action) {
                out.push((
                    t.action,
                    Configuration {
                        state: t.to,
                        active,
                    },
                ));
            }
        }
        out.sort();
        out
    }

    /// Every run on `word` from every initial configuration.
    pub fn run_all(&self, word: &[Action]) -> Result<BTreeSet<Run>, ModelError> {
        for a in word {
            a.check(&self.alphabet)?;
        }
        let mut partial: Vec<Vec<Configuration>> = self
            .initial_configurations()
            .into_iter()
            .map(|c| vec![c])
            .collect();
        for &a in word {
            let mut next = Vec::new();
            for path in partial {
                let last = path.last().expect("runs are non-empty");
                for succ in self.step_unchecked(last, a) {
                    let mut p = path.clone();
                    p.push(succ);
                    next.push(p);
                }
            }
            partial = next;
        }
        Ok(partial
            .into_iter()
            .map(|configs| Run {
                word: word.to_vec(),
                configs,
            })
            .collect())
    }

    /// True iff some run on `word` ends in a final state.
    pub fn accepts(&self, word: &[Action]) -> Result<bool, ModelError> {
        let finals = self.final_states.as_ref().ok_or(ModelError::NoFinalStates)?;
        Ok(self
            .run_all(word)?
            .iter()
            .any(|r| finals.contains(&r.last().state)))
    }

    /// Configurations reachable in at most `depth` steps.
    pub fn reachable(&self, depth: usize) -> BTreeSet<Configuration> {
        let mut seen: BTreeSet<Configuration> = self.initial_configurations().into_iter().collect();
        let mut frontier: Vec<Configuration> = seen.iter().cloned().collect();
        for _ in 0..depth {
            let mut next = Vec::new();
            for c in &frontier {
                for (_, succ) in self.successors(c) {
                    if seen.insert(succ.clone()) {
                        next.push(succ);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        seen
    }

    /// A shortest accepted word of length at most `depth` (lexicographically
    /// least among the shortest). `None` only means no witness exists within
    /// the depth; it says nothing about emptiness beyond it.
    pub fn emptiness_witness_bounded(
        &self,
        depth: usize,
    ) -> Result<Option<Vec<Action>>, ModelError> {
        let finals = self.final_states.as_ref().ok_or(ModelError::NoFinalStates)?;
        let mut seen: BTreeSet<Configuration> = BTreeSet::new();
        let mut frontier: Vec<(Configuration, Vec<Action>)> = Vec::new();
        for c in self.initial_configurations() {
            if seen.insert(c.clone()) {
                frontier.push((c, Vec::new()));
            }
        }
        for level in 0..=depth {
            if let Some((_, word)) = frontier.iter().find(|(c, _)| finals.contains(&c.state)) {
                return Ok(Some(word.clone()));
            }
            if level == depth {
                break;
            }
            let mut next = Vec::new();
            for (c, word) in &frontier {
                for (a, succ) in self.successors(c) {
                    if seen.insert(succ.clone()) {
                        let mut w = word.clone();
                        w.push(a);
                        next.push((succ, w));
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        Ok(None)
    }
}

/// New active sets after `action`, or `None` when the action blocks.
fn apply_to_active(active: &[BTreeSet<u32>], action: Action) -> Option<Vec<BTreeSet<u32>>> {
    match action {
        Action::Tau => Some(active.to_vec()),
        Action::Req(t) => {
            let mut out = active.to_vec();
            let set = &mut out[t];
            let fresh = (1..).find(|i| !set.contains(i)).expect("finite set");
            set.insert(fresh);
            Some(out)
        }
        Action::Ans(t) => {
            let least = *active[t].iter().next()?;
            let mut out = active.to_vec();
            out[t].remove(&least);
            Some(out)
        }
    }
}

/// A client name: its type and its position in that type's enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClientName {
    pub ty: TypeId,
    index: u32,
}

impl ClientName {
    pub fn new(ty: TypeId, index: u32) -> Result<Self, ModelError> {
        if index == 0 {
            return Err(ModelError::ZeroClientIndex);
        }
        Ok(ClientName { ty, index })
    }

    pub fn index(&self) -> u32 {
        self.index
    }
}

/// Server state plus the active clients of each type.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub state: StateId,
    pub active: Vec<BTreeSet<u32>>,
}

impl Configuration {
    pub fn empty(state: StateId, types: usize) -> Self {
        Configuration {
            state,
            active: vec![BTreeSet::new(); types],
        }
    }

    pub fn is_initial(&self, sps: &Sps) -> bool {
        sps.initial.contains(&self.state) && self.active.iter().all(BTreeSet::is_empty)
    }

    pub fn clients(&self) -> impl Iterator<Item = ClientName> + '_ {
        self.active.iter().enumerate().flat_map(|(ty, set)| {
            set.iter().map(move |&index| ClientName { ty, index })
        })
    }

    pub fn display<'a>(&'a self, sps: &'a Sps) -> ConfigDisplay<'a> {
        ConfigDisplay { config: self, sps }
    }
}

pub struct ConfigDisplay<'a> {
    config: &'a Configuration,
    sps: &'a Sps,
}

impl fmt::Display for ConfigDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {{", self.sps.state_name(self.config.state))?;
        for (ty, set) in self.config.active.iter().enumerate() {
            if ty > 0 {
                write!(f, ", ")?;
            }
            let idx: Vec<String> = set.iter().map(u32::to_string).collect();
            write!(f, "{}:{{{}}}", self.sps.alphabet().name(ty), idx.join(","))?;
        }
        write!(f, "}})")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Run {
    pub word: Vec<Action>,
    pub configs: Vec<Configuration>,
}

impl Run {
    pub fn last(&self) -> &Configuration {
        self.configs.last().expect("runs are non-empty")
    }
}
