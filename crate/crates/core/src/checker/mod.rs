//! Explicit-state LTL checking over an expanded structure: the negated
//! property is translated to a Büchi automaton, the product with the
//! structure is built breadth-first, and a minimal accepting lasso is
//! extracted as counterexample.

mod brute;
mod buchi;
pub(crate) mod graph;
mod render;

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::expand::KripkeStructure;
use crate::ltl::{holds_on_lasso, LtlFormula};
use crate::model::Action;

pub use brute::brute_force_check;
pub use buchi::{ltl_to_buchi, BuchiAutomaton, BuchiEdge, Constraint};
pub use render::Step;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("the structure has no initial state")]
    EmptyInitial,
    #[error("search exceeds the limit of {0} product states")]
    Capacity(usize),
    #[error("brute-force enumeration exceeds {0} paths")]
    PathBudget(usize),
    #[error("internal error: counterexample failed validation: {0}")]
    InvalidCounterexample(String),
}

/// A step of a path. States without successors get a single `Quiescent`
/// self-loop so that every finite run extends to an infinite one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Move {
    Act(Action),
    Quiescent,
}

/// An ultimately periodic path: from `initial`, follow `stem`, then repeat
/// `cycle` forever. The cycle ends in the state the stem ends in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lasso {
    pub initial: usize,
    pub stem: Vec<(Move, usize)>,
    pub cycle: Vec<(Move, usize)>,
}

impl Lasso {
    pub fn loop_state(&self) -> usize {
        self.stem.last().map_or(self.initial, |&(_, s)| s)
    }

    pub fn moves(&self) -> impl Iterator<Item = Move> + '_ {
        self.stem.iter().chain(&self.cycle).map(|&(m, _)| m)
    }

    /// States at the word positions: the stem part (visited once) and the
    /// cycle part (repeated), so that the trace is `stem · cycle^ω`.
    pub fn positions(&self) -> (Vec<usize>, Vec<usize>) {
        let mut stem = vec![self.initial];
        stem.extend(self.stem.iter().map(|&(_, s)| s));
        let loop_state = stem.pop().expect("stem positions are non-empty");
        let mut cycle = vec![loop_state];
        cycle.extend(self.cycle.iter().map(|&(_, s)| s));
        cycle.pop();
        (stem, cycle)
    }

    pub fn labels(&self, k: &KripkeStructure) -> (Vec<BTreeSet<String>>, Vec<BTreeSet<String>>) {
        let (stem, cycle) = self.positions();
        (
            stem.iter().map(|&s| k.label(s).clone()).collect(),
            cycle.iter().map(|&s| k.label(s).clone()).collect(),
        )
    }

    /// Whether the lasso is a path of `k` (with quiescent completion) whose
    /// cycle closes.
    pub fn replay(&self, k: &KripkeStructure) -> Result<(), String> {
        if !k.initial().contains(&self.initial) {
            return Err(format!("state {} is not initial", self.initial));
        }
        if self.cycle.is_empty() {
            return Err("empty cycle".into());
        }
        let mut cur = self.initial;
        for &(m, to) in self.stem.iter().chain(&self.cycle) {
            if !moves(k, cur).contains(&(m, to)) {
                return Err(format!("no step {m:?} from {} to {}", k.describe(cur), to));
            }
            cur = to;
        }
        if cur != self.loop_state() {
            return Err("cycle does not return to the loop state".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub counterexample: Option<Lasso>,
    /// Reachable states without successors, completed with a quiescent loop.
    pub deadlocks_completed: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    pub max_product_states: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            max_product_states: 5_000_000,
        }
    }
}

/// Successors with quiescent completion, sorted by move then target.
pub fn moves(k: &KripkeStructure, id: usize) -> Vec<(Move, usize)> {
    let succ = k.successors(id);
    if succ.is_empty() {
        vec![(Move::Quiescent, id)]
    } else {
        succ.iter().map(|&(a, t)| (Move::Act(a), t)).collect()
    }
}

pub(crate) fn deadlock_count(k: &KripkeStructure) -> usize {
    (0..k.len()).filter(|&s| k.successors(s).is_empty()).count()
}

pub(crate) fn unknown_atom_warnings(k: &KripkeStructure, phi: &LtlFormula) -> Vec<String> {
    let universe = k.atom_universe();
    phi.atoms()
        .into_iter()
        .filter(|a| !universe.contains(*a))
        .map(|a| format!("atom `{a}` does not occur in the structure and is false everywhere"))
        .collect()
}

/// Fails with `InvalidCounterexample` unless `lasso` replays in `k` and its
/// trace violates `phi`.
pub fn validate_counterexample(
    k: &KripkeStructure,
    phi: &LtlFormula,
    lasso: &Lasso,
) -> Result<(), CheckError> {
    lasso.replay(k).map_err(CheckError::InvalidCounterexample)?;
    let (stem, cycle) = lasso.labels(k);
    if holds_on_lasso(phi, &stem, &cycle) {
        return Err(CheckError::InvalidCounterexample(
            "the trace satisfies the property".into(),
        ));
    }
    Ok(())
}

pub fn check(k: &KripkeStructure, phi: &LtlFormula) -> Result<Verdict, CheckError> {
    check_with(k, phi, CheckOptions::default())
}

/// Decides whether every infinite path of `k` satisfies `phi`. A returned
/// counterexample is minimal among lassos of the product with the automaton
/// for `!phi`: shortest stem, then shortest cycle, then lexicographically
/// least sequence of (move, target) steps.
pub fn check_with(
    k: &KripkeStructure,
    phi: &LtlFormula,
    opts: CheckOptions,
) -> Result<Verdict, CheckError> {
    if k.initial().is_empty() {
        return Err(CheckError::EmptyInitial);
    }
    let warnings = unknown_atom_warnings(k, phi);
    let deadlocks_completed = deadlock_count(k);
    let automaton = ltl_to_buchi(&phi.clone().not());
    let product = Product::build(k, &automaton, opts.max_product_states)?;
    let counterexample = product.minimal_lasso();
    if let Some(lasso) = &counterexample {
        validate_counterexample(k, phi, lasso)?;
    }
    Ok(Verdict {
        holds: counterexample.is_none(),
        counterexample,
        deadlocks_completed,
        warnings,
    })
}

type EdgeKey = (Move, usize, usize);

/// Product node `(s, q)`: the structure is in `s` and the automaton has
/// consumed the label of `s`, arriving in `q`.
struct Product {
    nodes: Vec<(usize, usize)>,
    accepting: Vec<bool>,
    dist: Vec<usize>,
    initial: Vec<usize>,
    adj: Vec<Vec<(EdgeKey, usize)>>,
}

impl Product {
    fn build(
        k: &KripkeStructure,
        a: &BuchiAutomaton,
        max: usize,
    ) -> Result<Product, CheckError> {
        let mut p = Product {
            nodes: Vec::new(),
            accepting: Vec::new(),
            dist: Vec::new(),
            initial: Vec::new(),
            adj: Vec::new(),
        };
        let mut index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut queue = VecDeque::new();
        let mut intern = |p: &mut Product, node: (usize, usize), d: usize, queue: &mut VecDeque<usize>| {
            if let Some(&id) = index.get(&node) {
                return Ok(id);
            }
            if p.nodes.len() >= max {
                return Err(CheckError::Capacity(max));
            }
            let id = p.nodes.len();
            index.insert(node, id);
            p.nodes.push(node);
            p.accepting.push(a.is_accepting(node.1));
            p.dist.push(d);
            p.adj.push(Vec::new());
            queue.push_back(id);
            Ok(id)
        };
        let mut starts: Vec<(usize, usize)> = Vec::new();
        for &s in k.initial() {
            for e in a.edges(a.initial()) {
                if e.constraint.holds(k.label(s)) {
                    starts.push((s, e.target));
                }
            }
        }
        starts.sort();
        starts.dedup();
        for node in starts {
            let id = intern(&mut p, node, 0, &mut queue)?;
            p.initial.push(id);
        }
        while let Some(id) = queue.pop_front() {
            let (s, q) = p.nodes[id];
            let d = p.dist[id];
            let mut out = Vec::new();
            for (m, t) in moves(k, s) {
                for e in a.edges(q) {
                    if e.constraint.holds(k.label(t)) {
                        let to = intern(&mut p, (t, e.target), d + 1, &mut queue)?;
                        out.push(((m, t, e.target), to));
                    }
                }
            }
            out.sort();
            out.dedup();
            p.adj[id] = out;
        }
        Ok(p)
    }

    fn key(&self, id: usize) -> (usize, usize) {
        self.nodes[id]
    }

    fn minimal_lasso(&self) -> Option<Lasso> {
        let n = self.nodes.len();
        let plain: Vec<Vec<usize>> = self
            .adj
            .iter()
            .map(|out| out.iter().map(|&(_, t)| t).collect())
            .collect();
        let comp = graph::tarjan(&plain);
        let comps = comp.iter().copied().max().map_or(0, |c| c + 1);
        let mut size = vec![0usize; comps];
        let mut has_acc = vec![false; comps];
        for v in 0..n {
            size[comp[v]] += 1;
            has_acc[comp[v]] |= self.accepting[v];
        }
        let good = |v: usize| {
            has_acc[comp[v]] && (size[comp[v]] > 1 || plain[v].contains(&v))
        };
        let stem_len = (0..n).filter(|&v| good(v)).map(|v| self.dist[v]).min()?;

        // Shortest accepting cycle through each candidate loop node.
        let mut best: Option<usize> = None;
        let mut targets = Vec::new();
        for v in (0..n).filter(|&v| self.dist[v] == stem_len && good(v)) {
            let len = self.cycle_distances(v, &comp).0;
            match best {
                Some(b) if len > b => {}
                Some(b) if len == b => targets.push(v),
                _ => {
                    best = Some(len);
                    targets = vec![v];
                }
            }
        }

        // Nodes on a shortest path to one of the targets.
        let mut reach = vec![false; n];
        for &t in &targets {
            reach[t] = true;
        }
        let mut by_dist: Vec<usize> = (0..n).filter(|&v| self.dist[v] < stem_len).collect();
        by_dist.sort_by_key(|&v| std::cmp::Reverse(self.dist[v]));
        for v in by_dist {
            reach[v] = self.adj[v]
                .iter()
                .any(|&(_, w)| self.dist[w] == self.dist[v] + 1 && reach[w]);
        }

        let mut cur = *self
            .initial
            .iter()
            .filter(|&&v| reach[v])
            .min_by_key(|&&v| self.key(v))?;
        let start = cur;
        let mut stem = Vec::new();
        for _ in 0..stem_len {
            let &((m, s, _), w) = self.adj[cur]
                .iter()
                .find(|&&(_, w)| self.dist[w] == self.dist[cur] + 1 && reach[w])
                .expect("a shortest path to a target continues");
            stem.push((m, s));
            cur = w;
        }

        let (len, to_goal) = self.cycle_distances(cur, &comp);
        let layer = |v: usize, l: usize| 2 * v + l;
        let mut state = (cur, usize::from(self.accepting[cur]));
        let mut cycle = Vec::new();
        for remaining in (1..=len).rev() {
            let (v, l) = state;
            let &((m, s, _), w) = self.adj[v]
                .iter()
                .find(|&&(_, w)| {
                    let nl = l | usize::from(self.accepting[w]);
                    comp[w] == comp[cur] && to_goal.get(&layer(w, nl)) == Some(&(remaining - 1))
                })
                .expect("a shortest accepting cycle continues");
            cycle.push((m, s));
            state = (w, l | usize::from(self.accepting[w]));
        }
        Some(Lasso {
            initial: self.nodes[start].0,
            stem,
            cycle,
        })
    }

    /// Length of the shortest cycle through `v` that visits an accepting
    /// node, together with the distance of every (node, visited-accepting)
    /// pair to the end of such a cycle, i.e. to `(v, 1)`.
    fn cycle_distances(&self, v: usize, comp: &[usize]) -> (usize, HashMap<usize, usize>) {
        let c = comp[v];
        let layer = |u: usize, l: usize| 2 * u + l;
        // Reverse edges inside the component, on the two-layer graph.
        let members: Vec<usize> = (0..self.nodes.len()).filter(|&u| comp[u] == c).collect();
        let mut rev: HashMap<usize, Vec<usize>> = HashMap::new();
        for &u in &members {
            for &(_, w) in &self.adj[u] {
                if comp[w] != c {
                    continue;
                }
                for l in 0..2 {
                    let nl = l | usize::from(self.accepting[w]);
                    rev.entry(layer(w, nl)).or_default().push(layer(u, l));
                }
            }
        }
        let goal = layer(v, 1);
        let mut dist: HashMap<usize, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        // The goal is reached by arriving at it, so seed with its predecessors.
        for &p in rev.get(&goal).into_iter().flatten() {
            if !dist.contains_key(&p) {
                dist.insert(p, 1);
                queue.push_back(p);
            }
        }
        while let Some(x) = queue.pop_front() {
            let d = dist[&x];
            for &p in rev.get(&x).into_iter().flatten() {
                if !dist.contains_key(&p) {
                    dist.insert(p, d + 1);
                    queue.push_back(p);
                }
            }
        }
        let start = layer(v, usize::from(self.accepting[v]));
        let len = *dist.get(&start).expect("v lies on an accepting cycle");
        dist.insert(goal, 0);
        (len, dist)
    }
}
