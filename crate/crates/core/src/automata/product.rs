//! Product of a labelled MDP with an omega-automaton.
//!
//! A product state `(s, q)` pairs an MDP state with the automaton state
//! *before* reading `L(s)`. Taking MDP action `a` moves to `(s', q')` with
//! probability `P(s, a, s')` where `q' ∈ δ(q, L(s))`. Its acceptance mark is
//! the automaton's mark for `q` reading `L(s)`, so the marks along a product
//! run are exactly the marks of the automaton run on the label word.
//!
//! For deterministic automata product action ids equal MDP action ids. With
//! nondeterminism the choice of `q'` becomes part of the action:
//! `a * |Q| + q'`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::Mutex;

use crate::acceptance::{AcceptanceCondition, StateMark};
use crate::automata::automaton::OmegaAutomaton;
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::mdp::Mdp;

/// Encodes and decodes product action ids.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ActionCodec {
    deterministic: bool,
    n_automaton_states: usize,
}

impl ActionCodec {
    pub fn new(aut: &OmegaAutomaton) -> Self {
        ActionCodec { deterministic: aut.is_deterministic(), n_automaton_states: aut.num_states() }
    }

    pub fn encode(&self, action: usize, next_q: usize) -> usize {
        if self.deterministic {
            action
        } else {
            action * self.n_automaton_states + next_q
        }
    }

    /// `(mdp action, chosen automaton successor)`; the successor is `None`
    /// for deterministic automata.
    pub fn decode(&self, product_action: usize) -> (usize, Option<usize>) {
        if self.deterministic {
            (product_action, None)
        } else {
            (product_action / self.n_automaton_states, Some(product_action % self.n_automaton_states))
        }
    }

    pub fn num_actions(&self, mdp_actions: usize) -> usize {
        if self.deterministic {
            mdp_actions
        } else {
            mdp_actions * self.n_automaton_states
        }
    }
}

fn label_letter(m: &Mdp, aut: &OmegaAutomaton, s: usize) -> Result<u32> {
    aut.letter(m.labels(s).iter()).map_err(|e| match e {
        Error::UnknownProposition(p) => {
            Error::UnknownProposition(format!("{p} (label of state {}) is not in the automaton alphabet", m.state_name(s)))
        }
        other => other,
    })
}

/// Product of a labelled MDP with an automaton, built eagerly.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductMdp {
    mdp: Mdp,
    pairs: Vec<(usize, usize)>,
    index: BTreeMap<(usize, usize), usize>,
    codec: ActionCodec,
    reachable: usize,
}

impl ProductMdp {
    /// Breadth-first construction from `(s0, q0)`. Product states are numbered
    /// in discovery order.
    pub fn build(m: &Mdp, aut: &OmegaAutomaton) -> Result<Self> {
        Self::construct(m, aut, false)
    }

    /// The full product over `S × Q`: reachable pairs first, in discovery
    /// order, followed by the unreachable ones in lexicographic order.
    pub fn build_full(m: &Mdp, aut: &OmegaAutomaton) -> Result<Self> {
        Self::construct(m, aut, true)
    }

    /// Number of reachable pair states (all of them unless built with
    /// [`build_full`](Self::build_full)).
    pub fn num_reachable(&self) -> usize {
        self.reachable
    }

    fn construct(m: &Mdp, aut: &OmegaAutomaton, full: bool) -> Result<Self> {
        let codec = ActionCodec::new(aut);
        let mut pairs = vec![(m.initial(), aut.initial())];
        let mut index = BTreeMap::from([((m.initial(), aut.initial()), 0)]);
        let mut edges: Vec<Vec<(usize, usize, f64)>> = Vec::new();
        let mut marks = Vec::new();
        let mut queue = VecDeque::from([0usize]);
        let mut reachable = None;
        loop {
            let Some(i) = queue.pop_front() else {
                reachable.get_or_insert(pairs.len());
                if !full || pairs.len() == m.num_states() * aut.num_states() {
                    break;
                }
                let missing = (0..m.num_states())
                    .flat_map(|s| (0..aut.num_states()).map(move |q| (s, q)))
                    .find(|p| !index.contains_key(p))
                    .expect("some pair is missing");
                index.insert(missing, pairs.len());
                pairs.push(missing);
                queue.push_back(pairs.len() - 1);
                continue;
            };
            let (s, q) = pairs[i];
            let letter = label_letter(m, aut, s)?;
            marks.push((i, aut.mark(q, letter)));
            let mut out = Vec::new();
            for c in m.choices(s) {
                for q2 in aut.successors(q, letter) {
                    let action = codec.encode(c.action, q2);
                    for &(t, p) in &c.successors {
                        let j = *index.entry((t, q2)).or_insert_with(|| {
                            pairs.push((t, q2));
                            queue.push_back(pairs.len() - 1);
                            pairs.len() - 1
                        });
                        out.push((action, j, p));
                    }
                }
            }
            if edges.len() <= i {
                edges.resize(i + 1, Vec::new());
            }
            edges[i] = out;
        }
        marks.sort_by_key(|(i, _)| *i);
        let marks: Vec<StateMark> = marks.into_iter().map(|(_, mk)| mk).collect();
        let acceptance = AcceptanceCondition::from_marks(&marks)?;

        let mut mdp = Mdp::new(pairs.len(), codec.num_actions(m.num_actions()), 0, acceptance);
        for (i, out) in edges.iter().enumerate() {
            for &(a, j, p) in out {
                mdp.add_transition(i, a, j, p);
            }
        }
        mdp.set_state_names(pairs.iter().map(|&(s, q)| format!("({},q{q})", m.state_name(s))).collect());
        let action_names = (0..codec.num_actions(m.num_actions()))
            .map(|a| match codec.decode(a) {
                (a, None) => m.action_name(a).to_string(),
                (a, Some(q)) => format!("({},q{q})", m.action_name(a)),
            })
            .collect();
        mdp.set_action_names(action_names);
        for (i, &(s, _)) in pairs.iter().enumerate() {
            mdp.set_labels(i, m.labels(s).iter().cloned());
        }
        let reachable = reachable.unwrap_or(pairs.len());
        Ok(ProductMdp { mdp, pairs, index, codec, reachable })
    }

    pub fn mdp(&self) -> &Mdp {
        &self.mdp
    }

    pub fn into_mdp(self) -> Mdp {
        self.mdp
    }

    pub fn pair(&self, i: usize) -> (usize, usize) {
        self.pairs[i]
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn index_of(&self, s: usize, q: usize) -> Option<usize> {
        self.index.get(&(s, q)).copied()
    }

    pub fn codec(&self) -> ActionCodec {
        self.codec
    }
}

#[derive(Default, Debug)]
struct Interner {
    pairs: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
}

impl Interner {
    fn intern(&mut self, pair: (usize, usize)) -> usize {
        if let Some(&i) = self.index.get(&pair) {
            return i;
        }
        self.pairs.push(pair);
        self.index.insert(pair, self.pairs.len() - 1);
        self.pairs.len() - 1
    }
}

/// Product explored on demand. Pair states are interned the first time a
/// successor query produces them; the table is behind a mutex so the product
/// can be shared between threads.
#[derive(Debug)]
pub struct OnTheFlyProduct {
    mdp: Mdp,
    aut: OmegaAutomaton,
    codec: ActionCodec,
    table: Mutex<Interner>,
}

impl OnTheFlyProduct {
    pub fn new(m: Mdp, aut: OmegaAutomaton) -> Result<Self> {
        // Check every label up front so queries cannot fail later.
        for s in 0..m.num_states() {
            label_letter(&m, &aut, s)?;
        }
        let codec = ActionCodec::new(&aut);
        let mut table = Interner::default();
        table.intern((m.initial(), aut.initial()));
        Ok(OnTheFlyProduct { mdp: m, aut, codec, table: Mutex::new(table) })
    }

    fn letter(&self, s: usize) -> u32 {
        self.aut.letter(self.mdp.labels(s).iter()).expect("labels checked at construction")
    }

    pub fn pair(&self, i: usize) -> (usize, usize) {
        self.table.lock().expect("interner lock").pairs[i]
    }

    pub fn intern(&self, s: usize, q: usize) -> usize {
        self.table.lock().expect("interner lock").intern((s, q))
    }

    /// Number of pair states created so far.
    pub fn num_interned(&self) -> usize {
        self.table.lock().expect("interner lock").pairs.len()
    }

    /// Successor distribution of product state `i` under product action `a`.
    pub fn successors(&self, i: usize, a: usize) -> Option<Vec<(usize, f64)>> {
        let (s, q) = self.pair(i);
        let (ma, q2) = self.resolve(s, q, a)?;
        let c = self.mdp.choice(s, ma)?;
        Some(c.successors.iter().map(|&(t, p)| (self.intern(t, q2), p)).collect())
    }

    fn resolve(&self, s: usize, q: usize, a: usize) -> Option<(usize, usize)> {
        let letter = self.letter(s);
        match self.codec.decode(a) {
            (ma, None) => Some((ma, self.aut.step(q, letter))),
            (ma, Some(q2)) => self.aut.successors(q, letter).any(|x| x == q2).then_some((ma, q2)),
        }
    }

    /// Expands everything reachable and returns the eager product.
    pub fn expand(&self) -> Result<ProductMdp> {
        ProductMdp::build(&self.mdp, &self.aut)
    }
}

impl Environment for OnTheFlyProduct {
    fn initial(&self) -> usize {
        0
    }

    fn enabled_actions(&self, i: usize) -> Vec<usize> {
        let (s, q) = self.pair(i);
        let letter = self.letter(s);
        let succ: Vec<usize> = self.aut.successors(q, letter).collect();
        let mut out = Vec::new();
        for a in self.mdp.enabled(s) {
            for &q2 in &succ {
                out.push(self.codec.encode(a, q2));
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn step(&self, i: usize, a: usize, rng: &mut crate::Rng) -> usize {
        let (s, q) = self.pair(i);
        let (ma, q2) = self.resolve(s, q, a).expect("action enabled in product");
        let t = self.mdp.choice(s, ma).expect("action enabled in product").sample(rng);
        self.intern(t, q2)
    }

    fn mark(&self, i: usize) -> StateMark {
        let (s, q) = self.pair(i);
        self.aut.mark(q, self.letter(s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::automaton::{globally, universal};
    use crate::experiments::figure1;

    #[test]
    fn universal_automaton_gives_isomorphic_product() {
        let mut m = figure1::mdp(0.3);
        m.set_acceptance(AcceptanceCondition::buchi([0, 1]));
        let aut = universal(vec!["s0".into()]);
        let p = ProductMdp::build(&m, &aut).unwrap();
        assert_eq!(p.mdp().num_states(), 2);
        for i in 0..2 {
            let (s, q) = p.pair(i);
            assert_eq!(q, 0);
            for a in m.enabled(s) {
                let pc = p.mdp().choice(i, a).unwrap();
                for &(t, prob) in &m.choice(s, a).unwrap().successors {
                    assert_eq!(pc.probability(p.index_of(t, 0).unwrap()), prob);
                }
            }
        }
    }

    #[test]
    fn figure1_globally_s0_product() {
        let m = figure1::mdp(0.5);
        let p = ProductMdp::build(&m, &globally("s0")).unwrap();
        // (s0,q0), (s1,q0), (s1,q1); (s0,q1) is unreachable.
        assert_eq!(p.pairs(), &[(0, 0), (1, 0), (1, 1)]);
        assert!(p.mdp().validate().is_valid());
        let r = crate::solver::optimal_policy(p.mdp());
        assert_eq!(r.value[0], 1.0);
        assert_eq!(r.policy.action(0), figure1::ACTION_A);
        assert_eq!(r.value[1], 0.0);
    }

    #[test]
    fn full_product_appends_unreachable_pairs() {
        let m = figure1::mdp(0.5);
        let p = ProductMdp::build_full(&m, &globally("s0")).unwrap();
        assert_eq!(p.pairs(), &[(0, 0), (1, 0), (1, 1), (0, 1)]);
        assert_eq!(p.num_reachable(), 3);
        assert!(p.mdp().validate().is_valid());
    }

    #[test]
    fn label_outside_alphabet_is_rejected() {
        let m = figure1::mdp(0.5);
        let aut = universal(vec!["other".into()]);
        assert!(matches!(ProductMdp::build(&m, &aut), Err(Error::UnknownProposition(_))));
        assert!(OnTheFlyProduct::new(m, aut).is_err());
    }

    #[test]
    fn on_the_fly_successors_match_eager() {
        let m = figure1::mdp(0.25);
        let aut = globally("s0");
        let eager = ProductMdp::build(&m, &aut).unwrap();
        let lazy = OnTheFlyProduct::new(m, aut).unwrap();
        let mut queue = vec![0usize];
        let mut seen = vec![0usize];
        while let Some(i) = queue.pop() {
            let (s, q) = lazy.pair(i);
            let e = eager.index_of(s, q).unwrap();
            for a in lazy.enabled_actions(i) {
                let succ = lazy.successors(i, a).unwrap();
                let ec = eager.mdp().choice(e, a).unwrap();
                for (t, p) in succ {
                    let (ts, tq) = lazy.pair(t);
                    assert_eq!(ec.probability(eager.index_of(ts, tq).unwrap()), p);
                    if !seen.contains(&t) {
                        seen.push(t);
                        queue.push(t);
                    }
                }
            }
        }
        assert_eq!(lazy.num_interned(), eager.mdp().num_states());
    }

    #[test]
    fn nondeterministic_choice_becomes_action() {
        // Two automaton successors on every letter: the product doubles the
        // action set and each product action fixes the automaton move.
        let aut = OmegaAutomaton::new(
            vec!["s0".into()],
            2,
            0,
            false,
            AcceptanceCondition::buchi([1]),
            crate::automata::automaton::AcceptanceOn::States,
            vec![(0, 0, 0), (0, 1, 0), (0, 1, 1), (0, 0, 1), (1, 0, 1), (1, 1, 1)],
        )
        .unwrap();
        let m = figure1::mdp(0.5);
        let p = ProductMdp::build(&m, &aut).unwrap();
        assert_eq!(p.mdp().num_actions(), 4);
        let codec = p.codec();
        assert_eq!(codec.decode(codec.encode(1, 1)), (1, Some(1)));
        assert!(p.mdp().validate().is_valid());
        assert_eq!(crate::solver::optimal_policy(p.mdp()).value[0], 1.0);
    }
}
