//! LTL to Büchi translation: negation normal form, the on-the-fly tableau of
//! Gerth, Peled, Vardi and Wolper producing a generalized automaton, then a
//! counter-based degeneralization.

use std::collections::{BTreeSet, HashMap};

use crate::ltl::LtlFormula;

/// Conjunction of literals over atom names.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constraint {
    pub pos: BTreeSet<String>,
    pub neg: BTreeSet<String>,
}

impl Constraint {
    pub fn is_trivial(&self) -> bool {
        self.pos.is_empty() && self.neg.is_empty()
    }

    pub fn is_satisfiable(&self) -> bool {
        self.pos.is_disjoint(&self.neg)
    }

    pub fn holds(&self, letter: &BTreeSet<String>) -> bool {
        self.pos.iter().all(|a| letter.contains(a)) && !self.neg.iter().any(|a| letter.contains(a))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuchiEdge {
    pub target: usize,
    pub constraint: Constraint,
}

/// State-based Büchi automaton. State 0 is the unique initial state; an
/// edge is taken while reading a letter that satisfies its constraint.
#[derive(Debug, Clone)]
pub struct BuchiAutomaton {
    edges: Vec<Vec<BuchiEdge>>,
    accepting: Vec<bool>,
}

impl BuchiAutomaton {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn initial(&self) -> usize {
        0
    }

    pub fn edges(&self, state: usize) -> &[BuchiEdge] {
        &self.edges[state]
    }

    pub fn is_accepting(&self, state: usize) -> bool {
        self.accepting[state]
    }

    pub fn transition_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }

    /// Whether the automaton accepts `stem · cycle^ω`.
    pub fn accepts_lasso(&self, stem: &[BTreeSet<String>], cycle: &[BTreeSet<String>]) -> bool {
        assert!(!cycle.is_empty(), "lasso cycle must be non-empty");
        let len = stem.len() + cycle.len();
        let letter = |i: usize| if i < stem.len() { &stem[i] } else { &cycle[i - stem.len()] };
        let succ = |i: usize| if i + 1 == len { stem.len() } else { i + 1 };
        // Node (i, q): about to read letter i in state q.
        let id = |i: usize, q: usize| i * self.len() + q;
        let total = len * self.len();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total];
        let mut seen = vec![false; total];
        let mut stack = vec![(0, self.initial())];
        seen[id(0, self.initial())] = true;
        while let Some((i, q)) = stack.pop() {
            for e in &self.edges[q] {
                if e.constraint.holds(letter(i)) {
                    let n = (succ(i), e.target);
                    adj[id(i, q)].push(id(n.0, n.1));
                    if !seen[id(n.0, n.1)] {
                        seen[id(n.0, n.1)] = true;
                        stack.push(n);
                    }
                }
            }
        }
        let comp = super::graph::tarjan(&adj);
        let mut size = vec![0usize; total];
        for v in 0..total {
            size[comp[v]] += 1;
        }
        (0..total).any(|v| {
            seen[v]
                && self.accepting[v % self.len()]
                && (size[comp[v]] > 1 || adj[v].contains(&v))
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Nnf {
    True,
    False,
    Lit(String, bool),
    And(usize, usize),
    Or(usize, usize),
    Next(usize),
    Until(usize, usize),
    Release(usize, usize),
}

#[derive(Default)]
struct Arena {
    nodes: Vec<Nnf>,
    index: HashMap<Nnf, usize>,
}

impl Arena {
    fn intern(&mut self, f: Nnf) -> usize {
        if let Some(&i) = self.index.get(&f) {
            return i;
        }
        self.nodes.push(f.clone());
        self.index.insert(f, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    fn fold(&mut self, items: &[LtlFormula], neg: bool, conj: bool) -> usize {
        let unit = if conj { Nnf::True } else { Nnf::False };
        let mut acc: Option<usize> = None;
        for f in items {
            let g = self.nnf(f, neg);
            acc = Some(match acc {
                None => g,
                Some(a) if conj => self.intern(Nnf::And(a, g)),
                Some(a) => self.intern(Nnf::Or(a, g)),
            });
        }
        acc.unwrap_or_else(|| self.intern(unit))
    }

    /// Negation normal form of `f` (of `!f` when `neg` is set).
    fn nnf(&mut self, f: &LtlFormula, neg: bool) -> usize {
        let node = match (f, neg) {
            (LtlFormula::True, false) | (LtlFormula::False, true) => Nnf::True,
            (LtlFormula::True, true) | (LtlFormula::False, false) => Nnf::False,
            (LtlFormula::Atom(a), _) => Nnf::Lit(a.clone(), !neg),
            (LtlFormula::Not(a), _) => return self.nnf(a, !neg),
            (LtlFormula::And(v), false) | (LtlFormula::Or(v), true) => {
                return self.fold(v, neg, true)
            }
            (LtlFormula::Or(v), false) | (LtlFormula::And(v), true) => {
                return self.fold(v, neg, false)
            }
            (LtlFormula::Implies(a, b), false) => {
                Nnf::Or(self.nnf(a, true), self.nnf(b, false))
            }
            (LtlFormula::Implies(a, b), true) => {
                Nnf::And(self.nnf(a, false), self.nnf(b, true))
            }
            (LtlFormula::Next(a), _) => Nnf::Next(self.nnf(a, neg)),
            (LtlFormula::Until(a, b), false) => Nnf::Until(self.nnf(a, false), self.nnf(b, false)),
            (LtlFormula::Until(a, b), true) => Nnf::Release(self.nnf(a, true), self.nnf(b, true)),
            (LtlFormula::Finally(a), false) => {
                let t = self.intern(Nnf::True);
                Nnf::Until(t, self.nnf(a, false))
            }
            (LtlFormula::Finally(a), true) => {
                let ff = self.intern(Nnf::False);
                Nnf::Release(ff, self.nnf(a, true))
            }
            (LtlFormula::Globally(a), false) => {
                let ff = self.intern(Nnf::False);
                Nnf::Release(ff, self.nnf(a, false))
            }
            (LtlFormula::Globally(a), true) => {
                let t = self.intern(Nnf::True);
                Nnf::Until(t, self.nnf(a, true))
            }
        };
        self.intern(node)
    }
}

struct Pending {
    incoming: BTreeSet<usize>,
    new: BTreeSet<usize>,
    old: BTreeSet<usize>,
    next: BTreeSet<usize>,
}

struct TableauNode {
    incoming: BTreeSet<usize>,
    old: BTreeSet<usize>,
}

/// Index of the pseudo-node every initial tableau node is entered from.
const INIT: usize = 0;

fn tableau(arena: &Arena, root: usize) -> Vec<TableauNode> {
    // Slot 0 is the pseudo-node; real nodes follow.
    let mut done: Vec<TableauNode> = vec![TableauNode {
        incoming: BTreeSet::new(),
        old: BTreeSet::new(),
    }];
    let mut lookup: HashMap<(BTreeSet<usize>, BTreeSet<usize>), usize> = HashMap::new();
    let mut work = vec![Pending {
        incoming: BTreeSet::from([INIT]),
        new: BTreeSet::from([root]),
        old: BTreeSet::new(),
        next: BTreeSet::new(),
    }];
    let negation = |f: usize| match &arena.nodes[f] {
        Nnf::Lit(a, pos) => arena.index.get(&Nnf::Lit(a.clone(), !pos)).copied(),
        _ => None,
    };
    while let Some(mut node) = work.pop() {
        let Some(&eta) = node.new.iter().next() else {
            let key = (node.old, node.next);
            if let Some(&id) = lookup.get(&key) {
                done[id].incoming.extend(node.incoming);
                continue;
            }
            let id = done.len();
            lookup.insert(key.clone(), id);
            done.push(TableauNode {
                incoming: node.incoming,
                old: key.0,
            });
            work.push(Pending {
                incoming: BTreeSet::from([id]),
                new: key.1,
                old: BTreeSet::new(),
                next: BTreeSet::new(),
            });
            continue;
        };
        node.new.remove(&eta);
        if node.old.contains(&eta) {
            work.push(node);
            continue;
        }
        match arena.nodes[eta].clone() {
            Nnf::False => {}
            // Keeping `True` out of `old` lets trivial nodes merge.
            Nnf::True => work.push(node),
            Nnf::Lit(..) => {
                if negation(eta).is_some_and(|n| node.old.contains(&n)) {
                    continue;
                }
                node.old.insert(eta);
                work.push(node);
            }
            Nnf::And(a, b) => {
                node.old.insert(eta);
                for g in [a, b] {
                    if !node.old.contains(&g) {
                        node.new.insert(g);
                    }
                }
                work.push(node);
            }
            Nnf::Next(a) => {
                node.old.insert(eta);
                node.next.insert(a);
                work.push(node);
            }
            Nnf::Or(a, b) | Nnf::Until(a, b) | Nnf::Release(a, b) => {
                node.old.insert(eta);
                let (first_new, first_next, second_new): (Vec<usize>, bool, Vec<usize>) =
                    match arena.nodes[eta] {
                        Nnf::Or(..) => (vec![a], false, vec![b]),
                        Nnf::Until(..) => (vec![a], true, vec![b]),
                        _ => (vec![b], true, vec![a, b]),
                    };
                let split = |extra: Vec<usize>, keep: bool, node: &Pending| {
                    let mut n = Pending {
                        incoming: node.incoming.clone(),
                        new: node.new.clone(),
                        old: node.old.clone(),
                        next: node.next.clone(),
                    };
                    n.new.extend(extra.into_iter().filter(|g| !node.old.contains(g)));
                    if keep {
                        n.next.insert(eta);
                    }
                    n
                };
                let second = split(second_new, false, &node);
                let first = split(first_new, first_next, &node);
                // Explore the first branch first.
                work.push(second);
                work.push(first);
            }
        }
    }
    done
}

/// Builds a Büchi automaton accepting exactly the words that satisfy `formula`.
pub fn ltl_to_buchi(formula: &LtlFormula) -> BuchiAutomaton {
    let mut arena = Arena::default();
    let root = arena.nnf(formula, false);
    let nodes = tableau(&arena, root);

    let untils: Vec<(usize, usize)> = arena
        .nodes
        .iter()
        .enumerate()
        .filter_map(|(i, f)| match f {
            Nnf::Until(_, b) => Some((i, *b)),
            _ => None,
        })
        .collect();
    let in_set = |q: usize, k: usize| {
        let (u, b) = untils[k];
        !nodes[q].old.contains(&u) || nodes[q].old.contains(&b) || arena.nodes[b] == Nnf::True
    };
    let constraint = |q: usize| {
        let mut c = Constraint::default();
        for &f in &nodes[q].old {
            if let Nnf::Lit(a, pos) = &arena.nodes[f] {
                if *pos {
                    c.pos.insert(a.clone());
                } else {
                    c.neg.insert(a.clone());
                }
            }
        }
        c
    };
    let constraints: Vec<Constraint> = (0..nodes.len()).map(constraint).collect();

    // Degeneralize: state (q, i) waits for acceptance set i. The pseudo-node
    // is only ever visited first, so it needs a single copy.
    let k = untils.len().max(1);
    let sets = untils.len();
    let index = |q: usize, i: usize| if q == INIT { 0 } else { 1 + (q - 1) * k + i };
    let total = 1 + (nodes.len() - 1) * k;
    let mut edges: Vec<Vec<BuchiEdge>> = vec![Vec::new(); total];
    let mut accepting = vec![false; total];
    for (q, node) in nodes.iter().enumerate().skip(1) {
        for i in 0..k {
            accepting[index(q, i)] = i == 0 && (sets == 0 || in_set(q, 0));
        }
        for &p in &node.incoming {
            for i in 0..if p == INIT { 1 } else { k } {
                let j = if p != INIT && (sets == 0 || in_set(p, i)) {
                    (i + 1) % k
                } else {
                    i
                };
                edges[index(p, i)].push(BuchiEdge {
                    target: index(q, j),
                    constraint: constraints[q].clone(),
                });
            }
        }
    }
    for out in &mut edges {
        out.sort_by(|a, b| (a.target, &a.constraint).cmp(&(b.target, &b.constraint)));
        out.dedup();
    }
    prune(BuchiAutomaton { edges, accepting })
}

/// Drops states unreachable from the initial state and renumbers densely.
fn prune(a: BuchiAutomaton) -> BuchiAutomaton {
    let mut order = vec![usize::MAX; a.len()];
    let mut queue = std::collections::VecDeque::from([0]);
    let mut kept = Vec::new();
    order[0] = 0;
    kept.push(0);
    while let Some(q) = queue.pop_front() {
        for e in &a.edges[q] {
            if order[e.target] == usize::MAX {
                order[e.target] = kept.len();
                kept.push(e.target);
                queue.push_back(e.target);
            }
        }
    }
    let edges = kept
        .iter()
        .map(|&q| {
            a.edges[q]
                .iter()
                .map(|e| BuchiEdge {
                    target: order[e.target],
                    constraint: e.constraint.clone(),
                })
                .collect()
        })
        .collect();
    let accepting = kept.iter().map(|&q| a.accepting[q]).collect();
    BuchiAutomaton { edges, accepting }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::holds_on_lasso;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn a(n: &str) -> LtlFormula {
        LtlFormula::atom(n)
    }

    fn word(letters: &[&[&str]]) -> Vec<BTreeSet<String>> {
        letters
            .iter()
            .map(|l| l.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    fn random_lasso(rng: &mut ChaCha8Rng, atoms: &[&str]) -> (Vec<BTreeSet<String>>, Vec<BTreeSet<String>>) {
        let letter = |rng: &mut ChaCha8Rng| -> BTreeSet<String> {
            atoms
                .iter()
                .filter(|_| rng.gen_bool(0.5))
                .map(|s| s.to_string())
                .collect()
        };
        let stem = (0..rng.gen_range(0..4)).map(|_| letter(rng)).collect();
        let cycle = (0..rng.gen_range(1..4)).map(|_| letter(rng)).collect();
        (stem, cycle)
    }

    #[test]
    fn true_is_one_accepting_self_loop() {
        let b = ltl_to_buchi(&LtlFormula::True);
        assert_eq!(b.len(), 2);
        assert_eq!(b.edges(1).len(), 1);
        assert_eq!(b.edges(1)[0].target, 1);
        assert!(b.edges(1)[0].constraint.is_trivial());
        assert!(b.is_accepting(1));
    }

    #[test]
    fn globally_matches_lasso_evaluation() {
        let f = a("p").globally();
        let b = ltl_to_buchi(&f);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let (stem, cycle) = random_lasso(&mut rng, &["p"]);
            assert_eq!(b.accepts_lasso(&stem, &cycle), holds_on_lasso(&f, &stem, &cycle));
        }
    }

    #[test]
    fn until_accepts_q_first_rejects_p_forever() {
        let f = a("p").until(a("q"));
        let b = ltl_to_buchi(&f);
        assert!(b.accepts_lasso(&word(&[&["q"]]), &word(&[&[]])));
        assert!(b.accepts_lasso(&word(&[&["p"], &["p"], &["q"]]), &word(&[&[]])));
        assert!(!b.accepts_lasso(&[], &word(&[&["p"]])));
        assert!(!b.accepts_lasso(&word(&[&["p"], &[]]), &word(&[&["q"]])));
    }

    #[test]
    fn every_edge_constraint_is_satisfiable() {
        let f = LtlFormula::And(vec![
            a("p").implies(a("p").not().next()).globally(),
            a("q").until(a("p").not()),
        ]);
        let b = ltl_to_buchi(&f);
        for q in 0..b.len() {
            assert!(b.edges(q).iter().all(|e| e.constraint.is_satisfiable()));
        }
    }

    #[test]
    fn false_accepts_nothing() {
        let b = ltl_to_buchi(&LtlFormula::False);
        assert!(!b.accepts_lasso(&[], &word(&[&[]])));
        let b = ltl_to_buchi(&LtlFormula::And(vec![a("p"), a("p").not()]));
        assert!(!b.accepts_lasso(&[], &word(&[&["p"]])));
    }

    fn formula() -> impl Strategy<Value = LtlFormula> {
        let leaf = prop_oneof![
            Just(LtlFormula::True),
            Just(LtlFormula::False),
            Just(a("p")),
            Just(a("q")),
        ];
        leaf.prop_recursive(4, 16, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(LtlFormula::not),
                inner.clone().prop_map(LtlFormula::next),
                inner.clone().prop_map(LtlFormula::finally),
                inner.clone().prop_map(LtlFormula::globally),
                (inner.clone(), inner.clone()).prop_map(|(x, y)| x.until(y)),
                (inner.clone(), inner.clone()).prop_map(|(x, y)| LtlFormula::And(vec![x, y])),
                (inner.clone(), inner.clone()).prop_map(|(x, y)| LtlFormula::Or(vec![x, y])),
                (inner.clone(), inner).prop_map(|(x, y)| x.implies(y)),
            ]
        })
    }

    fn letter() -> impl Strategy<Value = BTreeSet<String>> {
        proptest::sample::subsequence(vec!["p".to_string(), "q".to_string()], 0..=2)
            .prop_map(|v| v.into_iter().collect())
    }

    proptest! {
        #[test]
        fn automaton_agrees_with_lasso_semantics(
            f in formula(),
            stem in proptest::collection::vec(letter(), 0..4),
            cycle in proptest::collection::vec(letter(), 1..4),
        ) {
            let b = ltl_to_buchi(&f);
            prop_assert_eq!(b.accepts_lasso(&stem, &cycle), holds_on_lasso(&f, &stem, &cycle));
        }

        #[test]
        fn formula_and_negation_are_disjoint(
            f in formula(),
            stem in proptest::collection::vec(letter(), 0..4),
            cycle in proptest::collection::vec(letter(), 1..4),
        ) {
            let pos = ltl_to_buchi(&f).accepts_lasso(&stem, &cycle);
            let neg = ltl_to_buchi(&f.clone().not()).accepts_lasso(&stem, &cycle);
            prop_assert!(pos != neg);
        }
    }
}
