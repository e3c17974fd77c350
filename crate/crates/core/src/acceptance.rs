//! State-based omega-regular acceptance conditions.
//!
//! Büchi, max-odd parity and Rabin conditions all share one question: is a
//! set of states that is visited infinitely often (a BSCC, an end component,
//! the bottom SCC of a trajectory graph) winning? [`AcceptanceCondition::accepts`]
//! answers it for all three.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RabinPair {
    pub fin: BTreeSet<usize>,
    pub inf: BTreeSet<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum AcceptanceCondition {
    Buchi { accepting: BTreeSet<usize> },
    /// Max-odd semantics: a run wins iff the largest priority seen infinitely
    /// often is odd.
    Parity { priority: Vec<u32> },
    Rabin { pairs: Vec<RabinPair> },
}

/// The acceptance-relevant data attached to a single state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum StateMark {
    Buchi(bool),
    Parity(u32),
    /// `(in Fin_i, in Inf_i)` for every pair `i`.
    Rabin(Vec<(bool, bool)>),
}

impl AcceptanceCondition {
    pub fn buchi<I: IntoIterator<Item = usize>>(accepting: I) -> Self {
        AcceptanceCondition::Buchi { accepting: accepting.into_iter().collect() }
    }

    pub fn parity(priority: Vec<u32>) -> Self {
        AcceptanceCondition::Parity { priority }
    }

    pub fn rabin(pairs: Vec<(Vec<usize>, Vec<usize>)>) -> Self {
        AcceptanceCondition::Rabin {
            pairs: pairs
                .into_iter()
                .map(|(fin, inf)| RabinPair { fin: fin.into_iter().collect(), inf: inf.into_iter().collect() })
                .collect(),
        }
    }

    /// Checks that every referenced state is below `n_states`.
    pub fn check(&self, n_states: usize) -> Result<()> {
        let bad = |s: usize| Error::InvalidParameter(format!("acceptance references state {s} but there are {n_states} states"));
        match self {
            AcceptanceCondition::Buchi { accepting } => {
                if let Some(&s) = accepting.iter().find(|&&s| s >= n_states) {
                    return Err(bad(s));
                }
            }
            AcceptanceCondition::Parity { priority } => {
                if priority.len() != n_states {
                    return Err(Error::InvalidParameter(format!(
                        "parity condition has {} priorities for {n_states} states",
                        priority.len()
                    )));
                }
            }
            AcceptanceCondition::Rabin { pairs } => {
                if pairs.is_empty() {
                    return Err(Error::InvalidParameter("Rabin condition without pairs".into()));
                }
                for p in pairs {
                    if let Some(&s) = p.fin.iter().chain(&p.inf).find(|&&s| s >= n_states) {
                        return Err(bad(s));
                    }
                }
            }
        }
        Ok(())
    }

    /// Whether a run whose infinitely-often set is exactly `states` wins.
    pub fn accepts(&self, states: &[usize]) -> bool {
        match self {
            AcceptanceCondition::Buchi { accepting } => states.iter().any(|s| accepting.contains(s)),
            AcceptanceCondition::Parity { priority } => {
                states.iter().map(|&s| priority[s]).max().is_some_and(|p| p % 2 == 1)
            }
            AcceptanceCondition::Rabin { pairs } => pairs.iter().any(|p| {
                states.iter().all(|s| !p.fin.contains(s)) && states.iter().any(|s| p.inf.contains(s))
            }),
        }
    }

    pub fn mark(&self, state: usize) -> StateMark {
        match self {
            AcceptanceCondition::Buchi { accepting } => StateMark::Buchi(accepting.contains(&state)),
            AcceptanceCondition::Parity { priority } => StateMark::Parity(priority[state]),
            AcceptanceCondition::Rabin { pairs } => {
                StateMark::Rabin(pairs.iter().map(|p| (p.fin.contains(&state), p.inf.contains(&state))).collect())
            }
        }
    }

    /// Rebuilds a condition from per-state marks. All marks must be of the
    /// same kind (and, for Rabin, carry the same number of pairs).
    pub fn from_marks(marks: &[StateMark]) -> Result<Self> {
        let mismatch = || Error::InvalidParameter("state marks of mixed acceptance kinds".into());
        match marks.first() {
            None | Some(StateMark::Buchi(_)) => {
                let mut accepting = BTreeSet::new();
                for (s, m) in marks.iter().enumerate() {
                    match m {
                        StateMark::Buchi(true) => {
                            accepting.insert(s);
                        }
                        StateMark::Buchi(false) => {}
                        _ => return Err(mismatch()),
                    }
                }
                Ok(AcceptanceCondition::Buchi { accepting })
            }
            Some(StateMark::Parity(_)) => {
                let priority = marks
                    .iter()
                    .map(|m| match m {
                        StateMark::Parity(p) => Ok(*p),
                        _ => Err(mismatch()),
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(AcceptanceCondition::Parity { priority })
            }
            Some(StateMark::Rabin(first)) => {
                let n_pairs = first.len();
                let mut pairs = vec![RabinPair { fin: BTreeSet::new(), inf: BTreeSet::new() }; n_pairs];
                for (s, m) in marks.iter().enumerate() {
                    let StateMark::Rabin(bits) = m else { return Err(mismatch()) };
                    if bits.len() != n_pairs {
                        return Err(mismatch());
                    }
                    for (p, &(f, i)) in pairs.iter_mut().zip(bits) {
                        if f {
                            p.fin.insert(s);
                        }
                        if i {
                            p.inf.insert(s);
                        }
                    }
                }
                Ok(AcceptanceCondition::Rabin { pairs })
            }
        }
    }

    /// The mark of a fresh absorbing state that wins on its own: in F for
    /// Büchi, the smallest odd priority at least as large as every existing
    /// one for parity, and the only member of an extra `(∅, {sink})` pair for
    /// Rabin.
    pub fn winning_sink_mark(&self) -> StateMark {
        match self {
            AcceptanceCondition::Buchi { .. } => StateMark::Buchi(true),
            AcceptanceCondition::Parity { priority } => {
                let max = priority.iter().copied().max().unwrap_or(0);
                StateMark::Parity(if max % 2 == 1 { max } else { max + 1 })
            }
            AcceptanceCondition::Rabin { pairs } => {
                let mut bits = vec![(false, false); pairs.len()];
                bits.push((false, true));
                StateMark::Rabin(bits)
            }
        }
    }

    /// Extends a list of marks of this kind so they agree with a
    /// [`winning_sink_mark`](Self::winning_sink_mark): Rabin marks of ordinary
    /// states gain a `(false, false)` entry for the sink pair.
    pub fn extend_for_sink(&self, mark: StateMark) -> StateMark {
        match mark {
            StateMark::Rabin(mut bits) => {
                bits.push((false, false));
                StateMark::Rabin(bits)
            }
            other => other,
        }
    }

    /// Sets of states the solver tries to visit infinitely often inside a
    /// winning end component. For parity this is the single set of states
    /// carrying the largest priority of `within`.
    pub fn witness(&self, within: &[usize]) -> Option<Vec<usize>> {
        match self {
            AcceptanceCondition::Buchi { accepting } => {
                let w: Vec<usize> = within.iter().copied().filter(|s| accepting.contains(s)).collect();
                (!w.is_empty()).then_some(w)
            }
            AcceptanceCondition::Parity { priority } => {
                let max = within.iter().map(|&s| priority[s]).max()?;
                (max % 2 == 1).then(|| within.iter().copied().filter(|&s| priority[s] == max).collect())
            }
            AcceptanceCondition::Rabin { pairs } => pairs.iter().find_map(|p| {
                if within.iter().any(|s| p.fin.contains(s)) {
                    return None;
                }
                let w: Vec<usize> = within.iter().copied().filter(|s| p.inf.contains(s)).collect();
                (!w.is_empty()).then_some(w)
            }),
        }
    }
}
