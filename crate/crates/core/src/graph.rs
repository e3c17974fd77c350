//! Strongly connected components, bottom SCCs of Markov chains, and maximal
//! end components of MDPs.

use std::collections::BTreeMap;

use crate::mdp::{MarkovChain, Mdp};

/// Tarjan's algorithm, iterative. Components are returned in reverse
/// topological order (a component appears before any component that can
/// reach it), each sorted ascending.
pub fn tarjan_scc(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0;
    // (node, next child position)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(top) = call.last_mut() {
            let v = top.0;
            if top.1 < adj[v].len() {
                let w = adj[v][top.1];
                top.1 += 1;
                if index[w] == UNVISITED {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                out.push(comp);
            }
        }
    }
    out
}

/// Positive-probability successor lists of a chain.
pub fn chain_graph(c: &MarkovChain) -> Vec<Vec<usize>> {
    (0..c.num_states()).map(|s| c.successors(s).collect()).collect()
}

/// Bottom SCCs over the full state set, sorted by smallest member.
pub fn bsccs(c: &MarkovChain) -> Vec<Vec<usize>> {
    bottom_components(&chain_graph(c))
}

/// Bottom SCCs of an arbitrary digraph.
pub fn bottom_components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let sccs = tarjan_scc(adj);
    let mut comp_of = vec![0; adj.len()];
    for (i, comp) in sccs.iter().enumerate() {
        for &s in comp {
            comp_of[s] = i;
        }
    }
    let mut out: Vec<Vec<usize>> = sccs
        .iter()
        .enumerate()
        .filter(|(i, comp)| comp.iter().all(|&s| adj[s].iter().all(|&t| comp_of[t] == *i)))
        .map(|(_, comp)| comp.clone())
        .collect();
    out.sort();
    out
}

/// Bottom SCCs that are reachable from the chain's initial state.
pub fn reachable_bsccs(c: &MarkovChain) -> Vec<Vec<usize>> {
    let reach = c.reachable();
    bsccs(c).into_iter().filter(|b| reach[b[0]]).collect()
}

/// An end component: states with the actions that keep it closed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EndComponent {
    pub actions: BTreeMap<usize, Vec<usize>>,
}

impl EndComponent {
    pub fn states(&self) -> Vec<usize> {
        self.actions.keys().copied().collect()
    }

    pub fn contains(&self, s: usize) -> bool {
        self.actions.contains_key(&s)
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

pub fn mec_decomposition(m: &Mdp) -> Vec<EndComponent> {
    let allowed: Vec<Vec<usize>> = (0..m.num_states()).map(|s| m.enabled(s).collect()).collect();
    mecs_restricted(m, allowed)
}

/// Maximal end components of the sub-MDP that keeps, at each state, only the
/// actions listed in `allowed` (an empty list removes the state). Sorted by
/// smallest member state.
pub fn mecs_restricted(m: &Mdp, mut allowed: Vec<Vec<usize>>) -> Vec<EndComponent> {
    let n = m.num_states();
    loop {
        let alive: Vec<bool> = allowed.iter().map(|a| !a.is_empty()).collect();
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|s| {
                let mut succ: Vec<usize> = allowed[s]
                    .iter()
                    .flat_map(|&a| m.choice(s, a).expect("allowed action is enabled").support())
                    .filter(|&t| alive[t])
                    .collect();
                succ.sort_unstable();
                succ.dedup();
                succ
            })
            .collect();
        let sccs = tarjan_scc(&adj);
        let mut comp_of = vec![usize::MAX; n];
        for (i, comp) in sccs.iter().enumerate() {
            for &s in comp {
                comp_of[s] = i;
            }
        }
        let mut changed = false;
        for s in 0..n {
            let before = allowed[s].len();
            allowed[s].retain(|&a| {
                m.choice(s, a).expect("enabled").support().all(|t| alive[t] && comp_of[t] == comp_of[s])
            });
            changed |= allowed[s].len() != before;
        }
        if !changed {
            let mut out: Vec<EndComponent> = sccs
                .into_iter()
                .filter(|comp| comp.iter().all(|&s| !allowed[s].is_empty()))
                .map(|comp| EndComponent { actions: comp.into_iter().map(|s| (s, allowed[s].clone())).collect() })
                .collect();
            out.sort_by_key(|ec| ec.actions.keys().next().copied());
            return out;
        }
    }
}
