//! The optimistic model: known pairs use empirical frequencies, everything
//! else moves to an absorbing accepting sink.

use crate::acceptance::{AcceptanceCondition, StateMark};
use crate::error::Result;
use crate::learner::counts::VisitCounts;
use crate::mdp::Mdp;

#[derive(Clone, Debug, PartialEq)]
pub struct OptimisticModel {
    pub mdp: Mdp,
    pub sink: usize,
    pub k: u64,
}

impl OptimisticModel {
    pub fn is_known(&self, counts: &VisitCounts, s: usize, a: usize) -> bool {
        s != self.sink && counts.is_known(s, a, self.k)
    }
}

/// Builds the optimistic model over states `0..marks.len()` plus a sink
/// with the next index. `enabled[s]` lists the actions of state `s`.
pub fn build_optimistic(
    counts: &VisitCounts,
    k: u64,
    enabled: &[Vec<usize>],
    marks: &[StateMark],
    initial: usize,
) -> Result<OptimisticModel> {
    let n = marks.len();
    let sink = n;
    let base = AcceptanceCondition::from_marks(marks)?;
    let sink_mark = base.winning_sink_mark();
    let mut all: Vec<StateMark> = marks.iter().cloned().map(|m| base.extend_for_sink(m)).collect();
    all.push(sink_mark);
    let acceptance = AcceptanceCondition::from_marks(&all)?;

    let n_actions = enabled.iter().flatten().copied().max().map_or(1, |a| a + 1);
    let mut mdp = Mdp::new(n + 1, n_actions, initial, acceptance);
    for (s, acts) in enabled.iter().enumerate() {
        for &a in acts {
            match counts.pair(s, a) {
                Some(p) if p.total >= k => {
                    for (&t, &c) in &p.successors {
                        mdp.add_transition(s, a, t, c as f64 / p.total as f64);
                    }
                }
                _ => mdp.add_transition(s, a, sink, 1.0),
            }
        }
    }
    mdp.add_transition(sink, 0, sink, 1.0);
    Ok(OptimisticModel { mdp, sink, k })
}
