//! Epsilon-recurrence times.
//!
//! A trajectory of length `T` has `T` transitions and `T + 1` state
//! occurrences, the one at time 0 included. It *recurs* if some BSCC of the
//! chain has every one of its states occurring at least twice. The
//! epsilon-recurrence time is the smallest `T` for which a length-`T`
//! trajectory from the initial state recurs with probability at least
//! `1 - epsilon`. For an MDP it is the maximum over positional policies.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::BuildHasherDefault;

use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::bsccs;
use crate::mdp::{MarkovChain, Mdp, PositionalPolicy};

/// Largest BSCC the exact computation accepts (3^12 counter patterns).
pub const MAX_EXACT_BSCC: usize = 12;
/// Maximum number of policy classes enumerated by exhaustive MDP mode.
pub const MAX_POLICY_CLASSES: usize = 1_000_000;
/// Slack when comparing a computed probability against `1 - epsilon`.
pub const PROBABILITY_SLACK: f64 = 1e-12;

/// Fixed-key hasher so iteration order, and with it floating-point summation
/// order, is reproducible.
type StableMap<K, V> = HashMap<K, V, BuildHasherDefault<DefaultHasher>>;

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    Ok(())
}

/// Closed-form upper bound `⌈2n · ln(ε/2) / ln(1 − p_min^n)⌉`. For
/// `p_min = 1` the expression degenerates and `2n` is returned.
pub fn recurrence_time_bound(n_states: usize, p_min: f64, epsilon: f64) -> Result<usize> {
    check_epsilon(epsilon)?;
    if n_states == 0 {
        return Err(Error::InvalidParameter("the chain needs at least one state".into()));
    }
    if !(p_min > 0.0 && p_min <= 1.0) {
        return Err(Error::InvalidParameter(format!("p_min must lie in (0, 1], got {p_min}")));
    }
    if p_min == 1.0 {
        return Ok(2 * n_states);
    }
    let n = n_states as f64;
    let pn = p_min.powf(n);
    if pn == 0.0 {
        return Err(Error::SizeBound(format!("p_min^n underflows for n = {n_states}, p_min = {p_min}")));
    }
    let t = (2.0 * n * (epsilon / 2.0).ln() / (-pn).ln_1p()).ceil();
    if !t.is_finite() || t > usize::MAX as f64 {
        return Err(Error::SizeBound("recurrence bound does not fit in usize".into()));
    }
    Ok(t as usize)
}

/// BSCC membership of every state: `(component id, position inside it)`.
struct Components {
    of: Vec<Option<(usize, usize)>>,
    members: Vec<Vec<usize>>,
}

impl Components {
    fn new(c: &MarkovChain) -> Self {
        let reach = c.reachable();
        let members: Vec<Vec<usize>> = bsccs(c).into_iter().filter(|b| reach[b[0]]).collect();
        let mut of = vec![None; c.num_states()];
        for (i, b) in members.iter().enumerate() {
            for (j, &s) in b.iter().enumerate() {
                of[s] = Some((i, j));
            }
        }
        Components { of, members }
    }
}

fn pow3(k: usize) -> u64 {
    3u64.pow(k as u32)
}

fn size_check(comps: &Components) -> Result<()> {
    if let Some(b) = comps.members.iter().find(|b| b.len() > MAX_EXACT_BSCC) {
        return Err(Error::SizeBound(format!(
            "a reachable BSCC has {} states; exact recurrence supports at most {MAX_EXACT_BSCC}",
            b.len()
        )));
    }
    Ok(())
}

/// Forward dynamic programming over `(state, counters)` where the counters
/// record, for the BSCC the run currently sits in, how often each of its
/// states occurred (saturating at 2). States outside BSCCs carry no
/// counters. Recurred mass is absorbed and accumulated.
pub struct RecurrenceDp<'a> {
    chain: &'a MarkovChain,
    comps: Components,
    /// Counter code with every digit equal to 2, per BSCC.
    full: Vec<u64>,
    dist: StableMap<(usize, u64), f64>,
    done: f64,
    t: usize,
}

impl<'a> RecurrenceDp<'a> {
    pub fn new(chain: &'a MarkovChain) -> Result<Self> {
        let comps = Components::new(chain);
        size_check(&comps)?;
        let full = comps.members.iter().map(|b| pow3(b.len()) - 1).collect();
        let mut dp = RecurrenceDp { chain, comps, full, dist: StableMap::default(), done: 0.0, t: 0 };
        let s0 = chain.initial();
        let (code, hit) = dp.bump(s0, 0);
        if hit {
            dp.done = 1.0;
        } else {
            dp.dist.insert((s0, code), 1.0);
        }
        Ok(dp)
    }

    fn bump(&self, s: usize, code: u64) -> (u64, bool) {
        match self.comps.of[s] {
            None => (0, false),
            Some((b, j)) => {
                let unit = pow3(j);
                let code = if (code / unit) % 3 < 2 { code + unit } else { code };
                (code, code == self.full[b])
            }
        }
    }

    /// Current trajectory length.
    pub fn time(&self) -> usize {
        self.t
    }

    /// Probability that a trajectory of the current length recurs.
    pub fn probability(&self) -> f64 {
        self.done.min(1.0)
    }

    pub fn step(&mut self) {
        let mut next: StableMap<(usize, u64), f64> =
            StableMap::with_capacity_and_hasher(self.dist.len(), Default::default());
        let prev = self.done;
        for (&(s, code), &p) in &self.dist {
            // entering a BSCC from outside starts from empty counters
            let base = if self.comps.of[s].is_some() { code } else { 0 };
            for &(t, q) in self.chain.row(s) {
                if q <= 0.0 {
                    continue;
                }
                let (code2, hit) = self.bump(t, base);
                if hit {
                    self.done += p * q;
                } else {
                    *next.entry((t, code2)).or_insert(0.0) += p * q;
                }
            }
        }
        debug_assert!(self.done >= prev, "recurrence probability must not decrease");
        self.dist = next;
        self.t += 1;
    }
}

/// Probability that a length-`t` trajectory recurs, for `t = 0..=max_t`.
pub fn recurrence_probabilities(c: &MarkovChain, max_t: usize) -> Result<Vec<f64>> {
    let mut dp = RecurrenceDp::new(c)?;
    let mut out = vec![dp.probability()];
    for _ in 0..max_t {
        dp.step();
        out.push(dp.probability());
    }
    Ok(out)
}

/// Exact epsilon-recurrence time, or `None` if it exceeds `horizon_cap`.
pub fn exact_recurrence_time(c: &MarkovChain, epsilon: f64, horizon_cap: usize) -> Result<Option<usize>> {
    check_epsilon(epsilon)?;
    let mut dp = RecurrenceDp::new(c)?;
    loop {
        if dp.probability() >= 1.0 - epsilon - PROBABILITY_SLACK {
            return Ok(Some(dp.time()));
        }
        if dp.time() >= horizon_cap {
            return Ok(None);
        }
        dp.step();
    }
}

/// First time a sampled run recurs, or `None` if it does not within
/// `horizon_cap` steps.
pub fn first_recurrence_time<R: rand::Rng + ?Sized>(c: &MarkovChain, horizon_cap: usize, rng: &mut R) -> Option<usize> {
    let comps = Components::new(c);
    first_recurrence_with(c, &comps, horizon_cap, rng)
}

fn first_recurrence_with<R: rand::Rng + ?Sized>(
    c: &MarkovChain,
    comps: &Components,
    horizon_cap: usize,
    rng: &mut R,
) -> Option<usize> {
    let mut count = vec![0u8; c.num_states()];
    let mut twice = vec![0usize; comps.members.len()];
    let mut visit = |s: usize, count: &mut Vec<u8>| -> bool {
        if let Some((b, _)) = comps.of[s] {
            if count[s] < 2 {
                count[s] += 1;
                if count[s] == 2 {
                    twice[b] += 1;
                    return twice[b] == comps.members[b].len();
                }
            }
        }
        false
    };
    let mut s = c.initial();
    if visit(s, &mut count) {
        return Some(0);
    }
    for t in 1..=horizon_cap {
        s = c.sample_next(s, rng);
        if visit(s, &mut count) {
            return Some(t);
        }
    }
    None
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McRecurrence {
    /// Smallest `T` whose empirical recurrence fraction reaches `1 - ε`;
    /// `None` if more than `ε` of the samples did not recur within the cap.
    pub t: Option<usize>,
    pub samples: usize,
    /// Empirical recurrence fraction at `t`.
    pub fraction: f64,
    /// 95% Wilson score interval for the recurrence probability at `t`.
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Monte-Carlo estimate of the epsilon-recurrence time from one batch of
/// long runs, each reduced to its first recurrence time.
pub fn mc_recurrence_estimate<R: rand::Rng + ?Sized>(
    c: &MarkovChain,
    epsilon: f64,
    n_samples: usize,
    horizon_cap: usize,
    rng: &mut R,
) -> Result<McRecurrence> {
    check_epsilon(epsilon)?;
    if n_samples == 0 {
        return Err(Error::InvalidParameter("at least one sample is required".into()));
    }
    let comps = Components::new(c);
    let mut times: Vec<usize> =
        (0..n_samples).map(|_| first_recurrence_with(c, &comps, horizon_cap, rng).unwrap_or(usize::MAX)).collect();
    times.sort_unstable();
    let need = ((1.0 - epsilon) * n_samples as f64 - 1e-9).ceil().max(1.0) as usize;
    let t = times[need - 1];
    let t = (t != usize::MAX).then_some(t);
    let successes = match t {
        Some(t) => times.iter().take_while(|&&x| x <= t).count(),
        None => times.iter().take_while(|&&x| x != usize::MAX).count(),
    };
    let (ci_low, ci_high) = wilson_interval(successes, n_samples, 1.96);
    Ok(McRecurrence { t, samples: n_samples, fraction: successes as f64 / n_samples as f64, ci_low, ci_high })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MdpRecurrenceMode {
    /// Every positional policy, up to agreement on reachable states.
    Exhaustive,
    /// `policies` uniformly random positional policies, each evaluated
    /// exactly when its BSCCs are small enough and by `mc_samples` runs
    /// otherwise.
    Sampled { policies: usize, mc_samples: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MdpRecurrence {
    /// Largest recurrence time found; `None` if some evaluated policy exceeds
    /// the horizon cap.
    pub t: Option<usize>,
    /// Whether `t` is the exact maximum over all positional policies.
    pub exact: bool,
    pub policies_evaluated: usize,
    /// A policy attaining `t`.
    pub worst_policy: PositionalPolicy,
    /// Closed-form ceiling; reported alongside sampled estimates.
    pub bound: Option<usize>,
}

/// Positional policies up to agreement on the states they reach: actions
/// are assigned in discovery order, so two policies that differ only on
/// unreachable states are enumerated once. Unassigned states take their
/// lowest enabled action.
pub fn reachable_policy_classes(m: &Mdp, limit: usize) -> Result<Vec<PositionalPolicy>> {
    let n = m.num_states();
    let mut out = Vec::new();
    let mut assigned: Vec<Option<usize>> = vec![None; n];
    fn first_open(m: &Mdp, assigned: &[Option<usize>]) -> Option<usize> {
        let mut seen = vec![false; m.num_states()];
        let mut queue = std::collections::VecDeque::from([m.initial()]);
        seen[m.initial()] = true;
        while let Some(s) = queue.pop_front() {
            let Some(a) = assigned[s] else { return Some(s) };
            for t in m.choice(s, a).expect("enabled").support() {
                if !seen[t] {
                    seen[t] = true;
                    queue.push_back(t);
                }
            }
        }
        None
    }
    fn recurse(
        m: &Mdp,
        assigned: &mut Vec<Option<usize>>,
        out: &mut Vec<PositionalPolicy>,
        limit: usize,
    ) -> Result<()> {
        match first_open(m, assigned) {
            None => {
                if out.len() >= limit {
                    return Err(Error::SizeBound(format!("more than {limit} reachable policy classes")));
                }
                let pi = (0..m.num_states())
                    .map(|s| assigned[s].unwrap_or_else(|| m.enabled(s).next().expect("validated model")))
                    .collect();
                out.push(PositionalPolicy(pi));
                Ok(())
            }
            Some(s) => {
                let actions: Vec<usize> = m.enabled(s).collect();
                for a in actions {
                    assigned[s] = Some(a);
                    recurse(m, assigned, out, limit)?;
                }
                assigned[s] = None;
                Ok(())
            }
        }
    }
    recurse(m, &mut assigned, &mut out, limit)?;
    Ok(out)
}

/// Maximum epsilon-recurrence time over positional policies.
pub fn mdp_recurrence_time(m: &Mdp, epsilon: f64, horizon_cap: usize, mode: &MdpRecurrenceMode) -> Result<MdpRecurrence> {
    check_epsilon(epsilon)?;
    let bound = recurrence_time_bound(m.num_states(), m.min_positive_probability(), epsilon).ok();
    let (policies, exact) = match mode {
        MdpRecurrenceMode::Exhaustive => (reachable_policy_classes(m, MAX_POLICY_CLASSES)?, true),
        MdpRecurrenceMode::Sampled { policies, seed, .. } => {
            let mut rng = crate::rng_from_seed(*seed);
            let sampled = (0..*policies)
                .map(|_| {
                    PositionalPolicy(
                        (0..m.num_states())
                            .map(|s| {
                                let acts: Vec<usize> = m.enabled(s).collect();
                                acts[rng.random_range(0..acts.len())]
                            })
                            .collect(),
                    )
                })
                .collect();
            (sampled, false)
        }
    };
    let mc_samples = match mode {
        MdpRecurrenceMode::Sampled { mc_samples, .. } => Some(*mc_samples),
        MdpRecurrenceMode::Exhaustive => None,
    };
    let seed = match mode {
        MdpRecurrenceMode::Sampled { seed, .. } => *seed,
        MdpRecurrenceMode::Exhaustive => 0,
    };
    let times: Vec<Result<Option<usize>>> = policies
        .par_iter()
        .enumerate()
        .map(|(i, pi)| {
            let chain = m.induce_chain(pi)?;
            match exact_recurrence_time(&chain, epsilon, horizon_cap) {
                Err(Error::SizeBound(msg)) => match mc_samples {
                    Some(n) => {
                        let mut rng = crate::derived_rng(seed, i as u64 + 1);
                        Ok(mc_recurrence_estimate(&chain, epsilon, n, horizon_cap, &mut rng)?.t)
                    }
                    None => Err(Error::SizeBound(msg)),
                },
                other => other,
            }
        })
        .collect();
    let mut worst: Option<(Option<usize>, usize)> = None;
    for (i, t) in times.into_iter().enumerate() {
        let t = t?;
        // None (beyond the cap) dominates every finite time
        let key = t.map_or(usize::MAX, |x| x);
        if worst.is_none_or(|(w, _)| key > w.map_or(usize::MAX, |x| x)) {
            worst = Some((t, i));
        }
    }
    let (t, i) = worst.ok_or_else(|| Error::InvalidParameter("no policy evaluated".into()))?;
    Ok(MdpRecurrence { t, exact, policies_evaluated: policies.len(), worst_policy: policies[i].clone(), bound })
}
