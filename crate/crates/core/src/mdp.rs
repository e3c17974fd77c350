//! Finite MDPs, Markov chains, positional policies and trajectories.
//!
//! States and actions are dense indices. Each state owns a list of enabled
//! [`Choice`]s sorted by action index; a choice is a sparse distribution over
//! successor states.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::acceptance::AcceptanceCondition;
use crate::error::{Error, Result};

/// Row sums must be within this distance of 1.
pub const PROB_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Choice {
    pub action: usize,
    pub successors: Vec<(usize, f64)>,
}

impl Choice {
    /// Draws a successor with a single uniform draw scanned over the
    /// successor list in order. Zero-probability entries are never returned.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = self.successors[0].0;
        for &(t, p) in &self.successors {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            last = t;
            if u < acc {
                return t;
            }
        }
        last
    }

    pub fn probability(&self, target: usize) -> f64 {
        self.successors.iter().filter(|(t, _)| *t == target).map(|(_, p)| p).sum()
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.successors.iter().filter(|(_, p)| *p > 0.0).map(|(t, _)| *t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mdp {
    state_names: Vec<String>,
    action_names: Vec<String>,
    choices: Vec<Vec<Choice>>,
    initial: usize,
    acceptance: AcceptanceCondition,
    labels: Vec<BTreeSet<String>>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    InitialOutOfRange { initial: usize },
    NoAction { state: usize },
    RowSum { state: usize, action: usize, sum: f64 },
    ProbabilityRange { state: usize, action: usize, target: usize, probability: f64 },
    DanglingState { state: usize, action: usize, target: usize },
    Acceptance(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::InitialOutOfRange { initial } => write!(f, "initial state {initial} does not exist"),
            Violation::NoAction { state } => write!(f, "state {state} has no enabled action"),
            Violation::RowSum { state, action, sum } => {
                write!(f, "row ({state}, {action}) sums to {sum} instead of 1")
            }
            Violation::ProbabilityRange { state, action, target, probability } => {
                write!(f, "P({state}, {action}, {target}) = {probability} is outside [0, 1]")
            }
            Violation::DanglingState { state, action, target } => {
                write!(f, "row ({state}, {action}) targets missing state {target}")
            }
            Violation::Acceptance(msg) => write!(f, "acceptance: {msg}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidModel(self.violations))
        }
    }
}

impl Mdp {
    pub fn new(n_states: usize, n_actions: usize, initial: usize, acceptance: AcceptanceCondition) -> Self {
        Mdp {
            state_names: (0..n_states).map(|s| format!("s{s}")).collect(),
            action_names: (0..n_actions).map(|a| format!("a{a}")).collect(),
            choices: vec![Vec::new(); n_states],
            initial,
            acceptance,
            labels: vec![BTreeSet::new(); n_states],
        }
    }

    /// Adds `p` to `P(s, a, t)`, enabling `a` at `s` if needed.
    pub fn add_transition(&mut self, s: usize, a: usize, t: usize, p: f64) {
        let row = &mut self.choices[s];
        let idx = match row.binary_search_by_key(&a, |c| c.action) {
            Ok(i) => i,
            Err(i) => {
                row.insert(i, Choice { action: a, successors: Vec::new() });
                i
            }
        };
        let succ = &mut row[idx].successors;
        match succ.iter_mut().find(|(x, _)| *x == t) {
            Some(e) => e.1 += p,
            None => succ.push((t, p)),
        }
    }

    pub fn set_state_names(&mut self, names: Vec<String>) {
        assert_eq!(names.len(), self.num_states());
        self.state_names = names;
    }

    pub fn set_action_names(&mut self, names: Vec<String>) {
        assert_eq!(names.len(), self.num_actions());
        self.action_names = names;
    }

    pub fn set_labels(&mut self, s: usize, labels: impl IntoIterator<Item = impl Into<String>>) {
        self.labels[s] = labels.into_iter().map(Into::into).collect();
    }

    pub fn set_acceptance(&mut self, acceptance: AcceptanceCondition) {
        self.acceptance = acceptance;
    }

    pub fn num_states(&self) -> usize {
        self.choices.len()
    }

    pub fn num_actions(&self) -> usize {
        self.action_names.len()
    }

    /// Largest number of actions enabled at any single state.
    pub fn max_enabled(&self) -> usize {
        self.choices.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn acceptance(&self) -> &AcceptanceCondition {
        &self.acceptance
    }

    pub fn state_name(&self, s: usize) -> &str {
        &self.state_names[s]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn action_name(&self, a: usize) -> &str {
        &self.action_names[a]
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    pub fn labels(&self, s: usize) -> &BTreeSet<String> {
        &self.labels[s]
    }

    pub fn choices(&self, s: usize) -> &[Choice] {
        &self.choices[s]
    }

    pub fn choice(&self, s: usize, a: usize) -> Option<&Choice> {
        self.choices[s].binary_search_by_key(&a, |c| c.action).ok().map(|i| &self.choices[s][i])
    }

    pub fn is_enabled(&self, s: usize, a: usize) -> bool {
        self.choice(s, a).is_some()
    }

    pub fn enabled(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        self.choices[s].iter().map(|c| c.action)
    }

    pub fn min_positive_probability(&self) -> f64 {
        self.choices
            .iter()
            .flatten()
            .flat_map(|c| c.successors.iter().map(|(_, p)| *p))
            .filter(|p| *p > 0.0)
            .fold(1.0, f64::min)
    }

    pub fn validate(&self) -> ValidationReport {
        let n = self.num_states();
        let mut violations = Vec::new();
        if self.initial >= n {
            violations.push(Violation::InitialOutOfRange { initial: self.initial });
        }
        for (s, row) in self.choices.iter().enumerate() {
            if row.is_empty() {
                violations.push(Violation::NoAction { state: s });
            }
            for c in row {
                let mut sum = 0.0;
                for &(t, p) in &c.successors {
                    if t >= n {
                        violations.push(Violation::DanglingState { state: s, action: c.action, target: t });
                    }
                    if !(0.0..=1.0).contains(&p) {
                        violations.push(Violation::ProbabilityRange { state: s, action: c.action, target: t, probability: p });
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > PROB_TOLERANCE {
                    violations.push(Violation::RowSum { state: s, action: c.action, sum });
                }
            }
        }
        if let Err(e) = self.acceptance.check(n) {
            violations.push(Violation::Acceptance(e.to_string()));
        }
        ValidationReport { violations }
    }

    /// Rescales every row to sum to 1. Only applied on explicit request.
    pub fn renormalize(&mut self) {
        for c in self.choices.iter_mut().flatten() {
            let sum: f64 = c.successors.iter().map(|(_, p)| p).sum();
            if sum > 0.0 {
                for e in &mut c.successors {
                    e.1 /= sum;
                }
            }
        }
    }

    /// The policy choosing the lowest-index enabled action everywhere.
    pub fn first_action_policy(&self) -> PositionalPolicy {
        PositionalPolicy(self.choices.iter().map(|row| row.first().map_or(0, |c| c.action)).collect())
    }

    pub fn check_policy(&self, pi: &PositionalPolicy) -> Result<()> {
        if pi.0.len() != self.num_states() {
            return Err(Error::PolicyLength { expected: self.num_states(), got: pi.0.len() });
        }
        for (s, &a) in pi.0.iter().enumerate() {
            if !self.is_enabled(s, a) {
                return Err(Error::DisabledAction { state: s, action: a });
            }
        }
        Ok(())
    }

    pub fn induce_chain(&self, pi: &PositionalPolicy) -> Result<MarkovChain> {
        self.check_policy(pi)?;
        let rows = (0..self.num_states())
            .map(|s| self.choice(s, pi.action(s)).expect("checked").successors.clone())
            .collect();
        Ok(MarkovChain { rows, initial: self.initial, acceptance: self.acceptance.clone() })
    }

    /// Samples `length` steps under `pi` from the initial state.
    pub fn sample_trajectory<R: Rng + ?Sized>(&self, pi: &PositionalPolicy, length: usize, rng: &mut R) -> Trajectory {
        let mut states = Vec::with_capacity(length + 1);
        let mut actions = Vec::with_capacity(length);
        let mut s = self.initial;
        states.push(s);
        for _ in 0..length {
            let a = pi.action(s);
            let c = self.choice(s, a).expect("policy action must be enabled");
            s = c.sample(rng);
            actions.push(a);
            states.push(s);
        }
        Trajectory { states, actions }
    }

    /// States reachable from the initial state in at most `steps` steps under
    /// `pi`, following positive-probability edges only.
    pub fn reachable_within(&self, pi: &PositionalPolicy, steps: usize) -> BTreeSet<usize> {
        let mut seen = vec![false; self.num_states()];
        let mut frontier = vec![self.initial];
        seen[self.initial] = true;
        for _ in 0..steps {
            let mut next = Vec::new();
            for &s in &frontier {
                if let Some(c) = self.choice(s, pi.action(s)) {
                    for t in c.support() {
                        if !seen[t] {
                            seen[t] = true;
                            next.push(t);
                        }
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        seen.iter().enumerate().filter(|(_, &b)| b).map(|(s, _)| s).collect()
    }
}

/// A memoryless deterministic policy: one action index per state.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PositionalPolicy(pub Vec<usize>);

impl PositionalPolicy {
    pub fn action(&self, s: usize) -> usize {
        self.0[s]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A finite run: `states.len() == actions.len() + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    pub states: Vec<usize>,
    pub actions: Vec<usize>,
}

impl Trajectory {
    /// Number of transitions.
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn terminal(&self) -> usize {
        *self.states.last().expect("trajectory has at least one state")
    }

    /// `(s_i, a_i, s_{i+1})` for every step.
    pub fn steps(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.actions.iter().enumerate().map(|(i, &a)| (self.states[i], a, self.states[i + 1]))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovChain {
    rows: Vec<Vec<(usize, f64)>>,
    initial: usize,
    acceptance: AcceptanceCondition,
}

impl MarkovChain {
    pub fn new(rows: Vec<Vec<(usize, f64)>>, initial: usize, acceptance: AcceptanceCondition) -> Self {
        MarkovChain { rows, initial, acceptance }
    }

    /// Builds a chain from a dense row-major matrix, dropping zero entries.
    pub fn from_dense(matrix: &[Vec<f64>], initial: usize, acceptance: AcceptanceCondition) -> Self {
        let rows = matrix
            .iter()
            .map(|r| r.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(t, &p)| (t, p)).collect())
            .collect();
        MarkovChain { rows, initial, acceptance }
    }

    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn acceptance(&self) -> &AcceptanceCondition {
        &self.acceptance
    }

    pub fn row(&self, s: usize) -> &[(usize, f64)] {
        &self.rows[s]
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn probability(&self, s: usize, t: usize) -> f64 {
        self.rows[s].iter().filter(|(x, _)| *x == t).map(|(_, p)| p).sum()
    }

    pub fn successors(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[s].iter().filter(|(_, p)| *p > 0.0).map(|(t, _)| *t)
    }

    pub fn min_positive_probability(&self) -> f64 {
        self.rows.iter().flatten().map(|(_, p)| *p).filter(|p| *p > 0.0).fold(1.0, f64::min)
    }

    pub fn validate(&self) -> ValidationReport {
        let n = self.num_states();
        let mut violations = Vec::new();
        if self.initial >= n {
            violations.push(Violation::InitialOutOfRange { initial: self.initial });
        }
        for (s, row) in self.rows.iter().enumerate() {
            let mut sum = 0.0;
            for &(t, p) in row {
                if t >= n {
                    violations.push(Violation::DanglingState { state: s, action: 0, target: t });
                }
                if !(0.0..=1.0).contains(&p) {
                    violations.push(Violation::ProbabilityRange { state: s, action: 0, target: t, probability: p });
                }
                sum += p;
            }
            if (sum - 1.0).abs() > PROB_TOLERANCE {
                violations.push(Violation::RowSum { state: s, action: 0, sum });
            }
        }
        if let Err(e) = self.acceptance.check(n) {
            violations.push(Violation::Acceptance(e.to_string()));
        }
        ValidationReport { violations }
    }

    pub fn sample_next<R: Rng + ?Sized>(&self, s: usize, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = s;
        for &(t, p) in &self.rows[s] {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            last = t;
            if u < acc {
                return t;
            }
        }
        last
    }

    /// A path of `length` transitions from the initial state.
    pub fn sample_path<R: Rng + ?Sized>(&self, length: usize, rng: &mut R) -> Vec<usize> {
        let mut path = Vec::with_capacity(length + 1);
        let mut s = self.initial;
        path.push(s);
        for _ in 0..length {
            s = self.sample_next(s, rng);
            path.push(s);
        }
        path
    }

    /// States reachable from the initial state (inclusive).
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(s) = queue.pop_front() {
            for t in self.successors(s) {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        seen
    }

    /// The same chain with its initial state moved.
    pub fn with_initial(&self, initial: usize) -> MarkovChain {
        MarkovChain { rows: self.rows.clone(), initial, acceptance: self.acceptance.clone() }
    }
}
