//! Omega-automata over the alphabet `2^AP`, read from a small JSON format.
//!
//! ```json
//! {
//!   "ap": ["s", "g"],
//!   "states": 2,
//!   "initial": 0,
//!   "deterministic": true,
//!   "acceptance": {"type": "buchi", "on": "transitions", "accepting": [5, 7]},
//!   "transitions": [[0, [], 0], [0, ["s"], 1], ...]
//! }
//! ```
//!
//! Letters are explicit subsets of `ap`. Acceptance is `buchi`
//! (`accepting`), `parity` (`priority`, max-odd) or `rabin`
//! (`pairs: [{"fin": [..], "inf": [..]}]`). Indices refer to automaton
//! states, or to positions in `transitions` when `"on": "transitions"`.
//! Transition-based acceptance requires all transitions leaving a state on the
//! same letter to agree on their acceptance marks, which deterministic
//! automata satisfy trivially.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::acceptance::{AcceptanceCondition, StateMark};
use crate::automata::ltl::Letter;
use crate::error::{Error, Result};

/// Propositions are packed into a bit mask, so the alphabet has at most
/// `2^MAX_AP` letters.
pub const MAX_AP: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AcceptanceOn {
    States,
    Transitions,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub from: usize,
    pub letter: u32,
    pub to: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OmegaAutomaton {
    ap: Vec<String>,
    n_states: usize,
    initial: usize,
    deterministic: bool,
    acceptance: AcceptanceCondition,
    on: AcceptanceOn,
    transitions: Vec<Transition>,
    /// `delta[q][letter]` lists indices into `transitions`.
    delta: Vec<Vec<Vec<usize>>>,
}

#[derive(Deserialize, Serialize)]
struct AutomatonFile {
    ap: Vec<String>,
    states: usize,
    initial: usize,
    #[serde(default)]
    deterministic: bool,
    acceptance: Value,
    transitions: Vec<(usize, Vec<String>, usize)>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidAutomaton(msg.into())
}

impl OmegaAutomaton {
    /// Builds and checks an automaton. Letters are bit masks over `ap`.
    pub fn new(
        ap: Vec<String>,
        n_states: usize,
        initial: usize,
        deterministic: bool,
        acceptance: AcceptanceCondition,
        on: AcceptanceOn,
        transitions: Vec<(usize, u32, usize)>,
    ) -> Result<Self> {
        if ap.len() > MAX_AP {
            return Err(bad(format!("at most {MAX_AP} atomic propositions are supported")));
        }
        if initial >= n_states {
            return Err(bad(format!("initial state {initial} out of range")));
        }
        let n_letters = 1usize << ap.len();
        let mut delta = vec![vec![Vec::new(); n_letters]; n_states];
        let transitions: Vec<Transition> =
            transitions.into_iter().map(|(from, letter, to)| Transition { from, letter, to }).collect();
        for (i, t) in transitions.iter().enumerate() {
            if t.from >= n_states || t.to >= n_states {
                return Err(bad(format!("transition {i} references a missing state")));
            }
            if t.letter as usize >= n_letters {
                return Err(bad(format!("transition {i} uses a letter outside 2^AP")));
            }
            delta[t.from][t.letter as usize].push(i);
        }
        for (q, row) in delta.iter().enumerate() {
            for (letter, ts) in row.iter().enumerate() {
                if ts.is_empty() {
                    return Err(bad(format!("no transition from state {q} on letter {}", fmt_letter(&ap, letter as u32))));
                }
                if deterministic && ts.len() > 1 {
                    return Err(bad(format!(
                        "deterministic automaton has {} transitions from state {q} on letter {}",
                        ts.len(),
                        fmt_letter(&ap, letter as u32)
                    )));
                }
            }
        }
        let positions = match on {
            AcceptanceOn::States => n_states,
            AcceptanceOn::Transitions => transitions.len(),
        };
        acceptance.check(positions).map_err(|e| bad(e.to_string()))?;
        let aut = OmegaAutomaton { ap, n_states, initial, deterministic, acceptance, on, transitions, delta };
        if on == AcceptanceOn::Transitions {
            for q in 0..n_states {
                for letter in 0..n_letters {
                    let ts = &aut.delta[q][letter];
                    let first = aut.acceptance.mark(ts[0]);
                    if ts.iter().any(|&t| aut.acceptance.mark(t) != first) {
                        return Err(bad(format!("transitions from state {q} on one letter disagree on acceptance")));
                    }
                }
            }
        }
        Ok(aut)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: AutomatonFile =
            serde_json::from_str(text).map_err(|e| Error::Format { context: format_context(text, &e), message: e.to_string() })?;
        let mut acc = file.acceptance;
        let on = match acc.as_object_mut().and_then(|o| o.remove("on")) {
            None => AcceptanceOn::States,
            Some(v) => serde_json::from_value(v).map_err(|e| bad(format!("acceptance.on: {e}")))?,
        };
        let acceptance: AcceptanceCondition =
            serde_json::from_value(acc).map_err(|e| bad(format!("acceptance: {e}")))?;
        let mut transitions = Vec::with_capacity(file.transitions.len());
        for (from, props, to) in file.transitions {
            transitions.push((from, letter_mask(&file.ap, props.iter())?, to));
        }
        OmegaAutomaton::new(file.ap, file.states, file.initial, file.deterministic, acceptance, on, transitions)
    }

    pub fn to_json(&self) -> String {
        let mut acceptance = serde_json::to_value(&self.acceptance).expect("serializable");
        acceptance["on"] = serde_json::to_value(self.on).expect("serializable");
        let file = AutomatonFile {
            ap: self.ap.clone(),
            states: self.n_states,
            initial: self.initial,
            deterministic: self.deterministic,
            acceptance,
            transitions: self
                .transitions
                .iter()
                .map(|t| (t.from, letter_props(&self.ap, t.letter).into_iter().collect(), t.to))
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("serializable")
    }

    pub fn ap(&self) -> &[String] {
        &self.ap
    }

    pub fn num_states(&self) -> usize {
        self.n_states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    pub fn acceptance(&self) -> &AcceptanceCondition {
        &self.acceptance
    }

    pub fn acceptance_on(&self) -> AcceptanceOn {
        self.on
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Encodes a state label as a letter. Propositions outside `ap` are an
    /// error.
    pub fn letter<'a>(&self, props: impl IntoIterator<Item = &'a String>) -> Result<u32> {
        letter_mask(&self.ap, props)
    }

    pub fn transition_ids(&self, q: usize, letter: u32) -> &[usize] {
        &self.delta[q][letter as usize]
    }

    pub fn successors(&self, q: usize, letter: u32) -> impl Iterator<Item = usize> + '_ {
        self.delta[q][letter as usize].iter().map(|&t| self.transitions[t].to)
    }

    /// The unique successor; panics on nondeterministic automata.
    pub fn step(&self, q: usize, letter: u32) -> usize {
        let ts = &self.delta[q][letter as usize];
        assert_eq!(ts.len(), 1, "step() requires a deterministic transition");
        self.transitions[ts[0]].to
    }

    /// Acceptance mark of an automaton state `q` about to read `letter`.
    pub fn mark(&self, q: usize, letter: u32) -> StateMark {
        match self.on {
            AcceptanceOn::States => self.acceptance.mark(q),
            AcceptanceOn::Transitions => self.acceptance.mark(self.delta[q][letter as usize][0]),
        }
    }

    /// Whether the run of a deterministic automaton on `prefix · cycle^ω` is
    /// accepting.
    pub fn accepts_lasso(&self, prefix: &[Letter], cycle: &[Letter]) -> Result<bool> {
        if !self.deterministic {
            return Err(bad("lasso acceptance is only defined here for deterministic automata"));
        }
        if cycle.is_empty() {
            return Err(Error::InvalidParameter("lasso cycle must be non-empty".into()));
        }
        let encode = |l: &Letter| self.letter(l.iter());
        let mut q = self.initial;
        for l in prefix {
            q = self.step(q, encode(l)?);
        }
        // Iterate whole cycles until the state at the cycle start repeats.
        let mut starts = vec![q];
        loop {
            for l in cycle {
                q = self.step(q, encode(l)?);
            }
            if let Some(i) = starts.iter().position(|&x| x == q) {
                let mut seen = BTreeSet::new();
                let mut r = starts[i];
                for _ in i..starts.len() {
                    for l in cycle {
                        let letter = encode(l)?;
                        seen.insert(match self.on {
                            AcceptanceOn::States => r,
                            AcceptanceOn::Transitions => self.delta[r][letter as usize][0],
                        });
                        r = self.step(r, letter);
                    }
                }
                let seen: Vec<usize> = seen.into_iter().collect();
                return Ok(self.acceptance.accepts(&seen));
            }
            starts.push(q);
        }
    }
}

fn letter_mask<'a>(ap: &[String], props: impl IntoIterator<Item = &'a String>) -> Result<u32> {
    let mut mask = 0u32;
    for p in props {
        let i = ap.iter().position(|a| a == p).ok_or_else(|| Error::UnknownProposition(p.clone()))?;
        mask |= 1 << i;
    }
    Ok(mask)
}

pub fn letter_props(ap: &[String], letter: u32) -> BTreeSet<String> {
    ap.iter().enumerate().filter(|(i, _)| letter & (1 << i) != 0).map(|(_, a)| a.clone()).collect()
}

fn fmt_letter(ap: &[String], letter: u32) -> String {
    format!("{{{}}}", letter_props(ap, letter).into_iter().collect::<Vec<_>>().join(","))
}

fn format_context(text: &str, e: &serde_json::Error) -> String {
    let line = text.lines().nth(e.line().saturating_sub(1)).unwrap_or("").trim();
    format!("automaton line {}: `{line}`", e.line())
}

/// Deterministic 2-state automaton for `G F s & G F g` with transition-based
/// Büchi acceptance: state 0 waits for `s`, state 1 waits for `g`, and the
/// transitions that read `g` while waiting for it are accepting.
pub fn gf_s_and_gf_g() -> OmegaAutomaton {
    let ap = vec!["s".to_string(), "g".to_string()];
    let (s, g) = (1u32, 2u32);
    let mut transitions = Vec::new();
    let mut accepting = Vec::new();
    for letter in 0..4u32 {
        // waiting for s
        let to = if letter & s != 0 { 1 } else { 0 };
        // seeing s and g together completes a round immediately
        let to = if letter == s | g { 0 } else { to };
        if letter == s | g {
            accepting.push(transitions.len());
        }
        transitions.push((0, letter, to));
    }
    for letter in 0..4u32 {
        let to = if letter & g != 0 { 0 } else { 1 };
        if letter & g != 0 {
            accepting.push(transitions.len());
        }
        transitions.push((1, letter, to));
    }
    OmegaAutomaton::new(ap, 2, 0, true, AcceptanceCondition::buchi(accepting), AcceptanceOn::Transitions, transitions)
        .expect("fixture is well formed")
}

/// Deterministic 2-state automaton for `G p`: state 1 is a rejecting sink.
pub fn globally(prop: &str) -> OmegaAutomaton {
    let ap = vec![prop.to_string()];
    let transitions = vec![(0, 1, 0), (0, 0, 1), (1, 0, 1), (1, 1, 1)];
    OmegaAutomaton::new(ap, 2, 0, true, AcceptanceCondition::buchi([0]), AcceptanceOn::States, transitions)
        .expect("fixture is well formed")
}

/// One state, every letter loops, every run accepts.
pub fn universal(ap: Vec<String>) -> OmegaAutomaton {
    let n_letters = 1u32 << ap.len();
    let transitions = (0..n_letters).map(|l| (0, l, 0)).collect();
    OmegaAutomaton::new(ap, 1, 0, true, AcceptanceCondition::buchi([0]), AcceptanceOn::States, transitions)
        .expect("fixture is well formed")
}
