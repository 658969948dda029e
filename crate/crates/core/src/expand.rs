//! The bounded interpreted structure: server states paired with per-type
//! request counters (`0..=n_i`) and request/answer flag sets, materialized as
//! an explicit Kripke structure from the reachable part only.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::ground::GroundingMap;
use crate::logic::BoundProfile;
use crate::model::{Action, Configuration, Sps, StateId, TypeId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExpandError {
    #[error("bound profile covers {found} client types, the system declares {expected}")]
    BoundsMismatch { expected: usize, found: usize },
    #[error("bound profile names type `{found}` where the system declares `{expected}`")]
    TypeNameMismatch { expected: String, found: String },
    #[error("client type `{0}` is used by the system but its bound is 0")]
    ZeroBound(String),
    #[error("state space exceeds the limit of {0} interpreted states")]
    Capacity(usize),
}

/// What a request does when its type's counter is already at the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AtBound {
    /// The request has no successor.
    #[default]
    Block,
    /// The request is taken: the server state follows the transition but
    /// counters and request flags stay as they are.
    Freeze,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FlagKind {
    Req,
    Ans,
}

/// A flag atom `p_ty[slot]` or `q_ty[slot]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Flag {
    pub kind: FlagKind,
    pub ty: TypeId,
    pub slot: u32,
}

impl Flag {
    pub fn req(ty: TypeId, slot: u32) -> Self {
        Flag {
            kind: FlagKind::Req,
            ty,
            slot,
        }
    }

    pub fn ans(ty: TypeId, slot: u32) -> Self {
        Flag {
            kind: FlagKind::Ans,
            ty,
            slot,
        }
    }

    pub fn atom(&self, map: &GroundingMap) -> String {
        match self.kind {
            FlagKind::Req => map.req_atom(self.ty, self.slot as usize),
            FlagKind::Ans => map.ans_atom(self.ty, self.slot as usize),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InterpretedState {
    pub state: StateId,
    pub counters: Vec<u32>,
    pub flags: BTreeSet<Flag>,
}

impl InterpretedState {
    pub fn initial(state: StateId, types: usize) -> Self {
        InterpretedState {
            state,
            counters: vec![0; types],
            flags: BTreeSet::new(),
        }
    }

    pub fn counter_vector(&self) -> String {
        let parts: Vec<String> = self.counters.iter().map(u32::to_string).collect();
        format!("<{}>", parts.join(","))
    }

    pub fn flag_list(&self, map: &GroundingMap) -> Vec<String> {
        let set: BTreeSet<String> = self.flags.iter().map(|f| f.atom(map)).collect();
        set.into_iter().collect()
    }
}

/// Server propositions of the state together with its flag atoms.
pub fn label(state: &InterpretedState, sps: &Sps, map: &GroundingMap) -> BTreeSet<String> {
    let mut out = sps.labels(state.state).clone();
    out.extend(state.flags.iter().map(|f| f.atom(map)));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpandOptions {
    pub at_bound: AtBound,
    pub max_states: usize,
}

impl Default for ExpandOptions {
    fn default() -> Self {
        ExpandOptions {
            at_bound: AtBound::Block,
            max_states: 2_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KripkeStructure {
    sps: Sps,
    map: GroundingMap,
    bounds: Vec<usize>,
    at_bound: AtBound,
    states: Vec<InterpretedState>,
    index: HashMap<InterpretedState, usize>,
    initial: Vec<usize>,
    edges: Vec<Vec<(Action, usize)>>,
    labels: Vec<BTreeSet<String>>,
}

pub fn expand(
    sps: &Sps,
    bounds: &BoundProfile,
    at_bound: AtBound,
) -> Result<KripkeStructure, ExpandError> {
    expand_with(
        sps,
        bounds,
        ExpandOptions {
            at_bound,
            ..ExpandOptions::default()
        },
    )
}

pub fn expand_with(
    sps: &Sps,
    bounds: &BoundProfile,
    opts: ExpandOptions,
) -> Result<KripkeStructure, ExpandError> {
    let alphabet = sps.alphabet();
    if bounds.len() != alphabet.len() {
        return Err(ExpandError::BoundsMismatch {
            expected: alphabet.len(),
            found: bounds.len(),
        });
    }
    for (ty, entry) in bounds.entries().iter().enumerate() {
        if entry.ty != alphabet.name(ty) {
            return Err(ExpandError::TypeNameMismatch {
                expected: alphabet.name(ty).to_string(),
                found: entry.ty.clone(),
            });
        }
    }
    for ty in sps.used_types() {
        if bounds.n(ty) == 0 {
            return Err(ExpandError::ZeroBound(alphabet.name(ty).to_string()));
        }
    }
    let limits: Vec<u32> = bounds.entries().iter().map(|e| e.n as u32).collect();
    let map = GroundingMap::new(bounds);

    let mut k = KripkeStructure {
        sps: sps.clone(),
        map,
        bounds: bounds.entries().iter().map(|e| e.n).collect(),
        at_bound: opts.at_bound,
        states: Vec::new(),
        index: HashMap::new(),
        initial: Vec::new(),
        edges: Vec::new(),
        labels: Vec::new(),
    };
    let mut queue = VecDeque::new();
    for &s in sps.initial() {
        let st = InterpretedState::initial(s, alphabet.len());
        let id = k.intern(st, opts.max_states)?;
        k.initial.push(id);
        queue.push_back(id);
    }
    while let Some(id) = queue.pop_front() {
        let src = k.states[id].clone();
        let mut out = Vec::new();
        for t in sps.outgoing(src.state) {
            let Some(dst) = successor(&src, t.action, t.to, &limits, opts.at_bound) else {
                continue;
            };
            let before = k.states.len();
            let did = k.intern(dst, opts.max_states)?;
            if did == before {
                queue.push_back(did);
            }
            out.push((t.action, did));
        }
        out.sort();
        out.dedup();
        k.edges[id] = out;
    }
    Ok(k)
}

fn successor(
    src: &InterpretedState,
    action: Action,
    to: StateId,
    limits: &[u32],
    at_bound: AtBound,
) -> Option<InterpretedState> {
    // Answer flags last one instant: every successor starts without them.
    let mut flags: BTreeSet<Flag> = src
        .flags
        .iter()
        .filter(|f| f.kind == FlagKind::Req)
        .copied()
        .collect();
    let mut counters = src.counters.clone();
    match action {
        Action::Tau => {}
        Action::Req(ty) => {
            if counters[ty] < limits[ty] {
                counters[ty] += 1;
                flags.insert(Flag::req(ty, counters[ty]));
            } else if at_bound == AtBound::Block {
                return None;
            }
        }
        Action::Ans(ty) => {
            let c = counters[ty];
            if c == 0 {
                return None;
            }
            flags.remove(&Flag::req(ty, c));
            flags.insert(Flag::ans(ty, c));
            counters[ty] = c - 1;
        }
    }
    Some(InterpretedState {
        state: to,
        counters,
        flags,
    })
}

impl KripkeStructure {
    fn intern(&mut self, st: InterpretedState, max: usize) -> Result<usize, ExpandError> {
        if let Some(&id) = self.index.get(&st) {
            return Ok(id);
        }
        if self.states.len() >= max {
            return Err(ExpandError::Capacity(max));
        }
        let id = self.states.len();
        self.labels.push(label(&st, &self.sps, &self.map));
        self.index.insert(st.clone(), id);
        self.states.push(st);
        self.edges.push(Vec::new());
        Ok(id)
    }

    pub fn sps(&self) -> &Sps {
        &self.sps
    }

    pub fn grounding(&self) -> &GroundingMap {
        &self.map
    }

    pub fn at_bound(&self) -> AtBound {
        self.at_bound
    }

    pub fn bounds(&self) -> &[usize] {
        &self.bounds
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// States in discovery (breadth-first) order; indices are stable.
    pub fn states(&self) -> &[InterpretedState] {
        &self.states
    }

    pub fn state(&self, id: usize) -> &InterpretedState {
        &self.states[id]
    }

    pub fn id_of(&self, st: &InterpretedState) -> Option<usize> {
        self.index.get(st).copied()
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    /// Outgoing `(action, target)` pairs sorted by action then target index.
    pub fn successors(&self, id: usize) -> &[(Action, usize)] {
        &self.edges[id]
    }

    pub fn transitions(&self) -> impl Iterator<Item = (usize, Action, usize)> + '_ {
        self.edges
            .iter()
            .enumerate()
            .flat_map(|(from, out)| out.iter().map(move |&(a, to)| (from, a, to)))
    }

    pub fn transition_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    pub fn label(&self, id: usize) -> &BTreeSet<String> {
        &self.labels[id]
    }

    /// Every atom a state of this structure could carry: all server
    /// propositions of the system and every flag atom within the bounds.
    pub fn atom_universe(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self
            .sps
            .server_props()
            .into_iter()
            .map(str::to_string)
            .collect();
        out.extend(self.map.atoms());
        out
    }

    pub fn describe(&self, id: usize) -> String {
        let st = &self.states[id];
        format!(
            "{} {} {{{}}}",
            self.sps.state_name(st.state),
            st.counter_vector(),
            st.flag_list(&self.map).join(", ")
        )
    }

    /// Canonical text dump: states sorted by (server state, counters, flags),
    /// one per line with their labels, then all transitions in the same order.
    pub fn dump(&self) -> String {
        let mut order: Vec<usize> = (0..self.states.len()).collect();
        order.sort_by(|&a, &b| self.states[a].cmp(&self.states[b]));
        let initial: BTreeSet<usize> = self.initial.iter().copied().collect();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "states {} transitions {}",
            self.states.len(),
            self.transition_count()
        );
        for &id in &order {
            let labels: Vec<&str> = self.labels[id].iter().map(String::as_str).collect();
            let _ = writeln!(
                out,
                "{} {} labels {{{}}}",
                if initial.contains(&id) { "*" } else { " " },
                self.describe(id),
                labels.join(", ")
            );
        }
        for &id in &order {
            let mut succ: Vec<(Action, &InterpretedState, usize)> = self.edges[id]
                .iter()
                .map(|&(a, to)| (a, &self.states[to], to))
                .collect();
            succ.sort();
            for (a, _, to) in succ {
                let _ = writeln!(
                    out,
                    "{} -{}-> {}",
                    self.describe(id),
                    a.display(self.sps.alphabet()),
                    self.describe(to)
                );
            }
        }
        out
    }

    /// Checks counter/flag coherence, request/answer exclusion, the one-instant
    /// lifetime of answer flags and projection onto the server transitions.
    /// Returns one message per violation.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (id, st) in self.states.iter().enumerate() {
            for (ty, &c) in st.counters.iter().enumerate() {
                let slots: BTreeSet<u32> = st
                    .flags
                    .iter()
                    .filter(|f| f.kind == FlagKind::Req && f.ty == ty)
                    .map(|f| f.slot)
                    .collect();
                if slots != (1..=c).collect() {
                    out.push(format!(
                        "coherence: {} has counter {c} for type {ty} but request slots {slots:?}",
                        self.describe(id)
                    ));
                }
                if c as usize > self.bounds[ty] {
                    out.push(format!("bound: {} exceeds n={}", self.describe(id), self.bounds[ty]));
                }
            }
            for f in &st.flags {
                if f.kind == FlagKind::Req && st.flags.contains(&Flag::ans(f.ty, f.slot)) {
                    out.push(format!(
                        "exclusion: {} carries both request and answer flags at slot {}",
                        self.describe(id),
                        f.slot
                    ));
                }
            }
        }
        for (from, a, to) in self.transitions() {
            let (src, dst) = (&self.states[from], &self.states[to]);
            for f in src.flags.iter().filter(|f| f.kind == FlagKind::Ans) {
                let reissued = a == Action::Ans(f.ty) && src.counters[f.ty] == f.slot;
                if dst.flags.contains(f) && !reissued {
                    out.push(format!(
                        "q-pulse: answer flag survives {} -> {}",
                        self.describe(from),
                        self.describe(to)
                    ));
                }
            }
            let projected = self
                .sps
                .outgoing(src.state)
                .iter()
                .any(|t| t.action == a && t.to == dst.state);
            if !projected {
                out.push(format!(
                    "projection: {} -{}-> {} has no server transition",
                    self.describe(from),
                    a.display(self.sps.alphabet()),
                    self.describe(to)
                ));
            }
        }
        out
    }
}

/// Compares the unbounded configuration semantics with the expanded
/// structure on every word of length up to `max_len` whose running
/// request-minus-answer count per type stays within the bounds. At every
/// prefix the sets of reachable `(server state, active counts)` must coincide
/// (and so must executability). Returns one message per disagreement.
pub fn simulation_agreement(k: &KripkeStructure, max_len: usize) -> Vec<String> {
    let sps = k.sps();
    let types = sps.alphabet().len();
    let mut letters = vec![Action::Tau];
    for ty in 0..types {
        letters.push(Action::Req(ty));
        letters.push(Action::Ans(ty));
    }
    let configs: BTreeSet<Configuration> = sps.initial_configurations().into_iter().collect();
    let kstates: BTreeSet<usize> = k.initial().iter().copied().collect();
    let mut out = Vec::new();
    let mut word = Vec::new();
    agree(
        k,
        &letters,
        max_len,
        &mut word,
        &vec![0i64; types],
        &configs,
        &kstates,
        &mut out,
    );
    out
}

#[allow(clippy::too_many_arguments)]
fn agree(
    k: &KripkeStructure,
    letters: &[Action],
    max_len: usize,
    word: &mut Vec<Action>,
    running: &[i64],
    configs: &BTreeSet<Configuration>,
    kstates: &BTreeSet<usize>,
    out: &mut Vec<String>,
) {
    let unbounded: BTreeSet<(StateId, Vec<u32>)> = configs
        .iter()
        .map(|c| (c.state, c.active.iter().map(|s| s.len() as u32).collect()))
        .collect();
    let bounded: BTreeSet<(StateId, Vec<u32>)> = kstates
        .iter()
        .map(|&id| (k.state(id).state, k.state(id).counters.clone()))
        .collect();
    if unbounded != bounded {
        let alphabet = k.sps().alphabet();
        let w: Vec<String> = word.iter().map(|a| a.display(alphabet)).collect();
        out.push(format!(
            "after [{}]: unbounded {unbounded:?} vs bounded {bounded:?}",
            w.join(",")
        ));
        return;
    }
    if word.len() == max_len || configs.is_empty() {
        return;
    }
    for &a in letters {
        let mut next_running = running.to_vec();
        match a {
            Action::Req(t) => next_running[t] += 1,
            Action::Ans(t) => next_running[t] -= 1,
            Action::Tau => {}
        }
        if next_running
            .iter()
            .enumerate()
            .any(|(t, &r)| r > k.bounds()[t] as i64)
        {
            continue;
        }
        let next_configs: BTreeSet<Configuration> = configs
            .iter()
            .flat_map(|c| {
                k.sps()
                    .successors(c)
                    .into_iter()
                    .filter(|(b, _)| *b == a)
                    .map(|(_, s)| s)
            })
            .collect();
        let next_k: BTreeSet<usize> = kstates
            .iter()
            .flat_map(|&id| {
                k.successors(id)
                    .iter()
                    .filter(|(b, _)| *b == a)
                    .map(|&(_, t)| t)
            })
            .collect();
        word.push(a);
        agree(k, letters, max_len, word, &next_running, &next_configs, &next_k, out);
        word.pop();
    }
}

/// Reachable interpreted states grouped by server state; handy for reports.
pub fn states_by_server_state(k: &KripkeStructure) -> BTreeMap<StateId, usize> {
    let mut out = BTreeMap::new();
    for st in k.states() {
        *out.entry(st.state).or_insert(0) += 1;
    }
    out
}
