//! Visit counts with saturation at the known threshold.

use std::collections::BTreeMap;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PairCounts {
    pub total: u64,
    pub successors: BTreeMap<usize, u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VisitCounts {
    pairs: BTreeMap<(usize, usize), PairCounts>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UpdateOutcome {
    /// Steps taken from a pair that was still unknown at that moment.
    pub unknown_visits: u64,
    /// Pairs whose count reached the threshold during this update, in order.
    pub newly_known: Vec<(usize, usize)>,
}

impl VisitCounts {
    pub fn new() -> Self {
        Self::default()
    }

    /// `c(s, a)`.
    pub fn count(&self, s: usize, a: usize) -> u64 {
        self.pairs.get(&(s, a)).map_or(0, |p| p.total)
    }

    /// `c(s, a, t)`.
    pub fn count_to(&self, s: usize, a: usize, t: usize) -> u64 {
        self.pairs.get(&(s, a)).and_then(|p| p.successors.get(&t)).copied().unwrap_or(0)
    }

    pub fn pair(&self, s: usize, a: usize) -> Option<&PairCounts> {
        self.pairs.get(&(s, a))
    }

    pub fn is_known(&self, s: usize, a: usize, k: u64) -> bool {
        self.count(s, a) >= k
    }

    /// Records one step, unless `(s, a)` already reached `k`. Returns whether
    /// the step was counted.
    pub fn record(&mut self, s: usize, a: usize, t: usize, k: u64) -> bool {
        let entry = self.pairs.entry((s, a)).or_default();
        if entry.total >= k {
            return false;
        }
        entry.total += 1;
        *entry.successors.entry(t).or_insert(0) += 1;
        true
    }

    /// Applies the steps of one trajectory in order.
    pub fn update(&mut self, steps: impl IntoIterator<Item = (usize, usize, usize)>, k: u64) -> UpdateOutcome {
        let mut out = UpdateOutcome::default();
        for (s, a, t) in steps {
            if self.record(s, a, t, k) {
                out.unknown_visits += 1;
                if self.count(s, a) == k {
                    out.newly_known.push((s, a));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saturates_at_threshold() {
        let mut c = VisitCounts::new();
        let out = c.update([(0, 0, 1), (0, 0, 1), (0, 0, 0)], 1);
        assert_eq!(c.count(0, 0), 1);
        assert_eq!(out.unknown_visits, 1);
        assert_eq!(out.newly_known, vec![(0, 0)]);
    }

    #[test]
    fn distinct_pairs_counted_once_each() {
        let mut c = VisitCounts::new();
        c.update((0..5).map(|s| (s, 0, s + 1)), 10);
        for s in 0..5 {
            assert_eq!(c.count(s, 0), 1);
        }
    }

    #[test]
    fn order_dependent_saturation() {
        let mut c = VisitCounts::new();
        let steps = (0..8).map(|i| if [0, 3, 7].contains(&i) { (9, 1, i) } else { (i, 0, i) });
        c.update(steps, 2);
        assert_eq!(c.count(9, 1), 2);
        assert_eq!(c.count_to(9, 1, 7), 0);
    }
}
