//! Repeated learner runs on the example models, written as CSV.
//!
//! Runs are independent and execute in parallel. Run `r` uses seed
//! `seed + r` for every `k`, so sweeps compare k values on identical random
//! streams. Rows come out in `(k, run)` order regardless of scheduling, and
//! wall-clock time is only included on request, so the CSV is a pure
//! function of the spec.

use std::cell::Cell;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acceptance::StateMark;
use crate::automata::product::ProductMdp;
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::experiments::{chain, figure1, gridworld};
use crate::learner::bounds::{known_threshold_k, mistake_bound_c};
use crate::learner::omega_pac::{omega_pac, LearnerConfig};
use crate::mdp::Mdp;
use crate::solver::{optimal_policy, policy_satisfaction_probability};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "lowercase")]
pub enum Experiment {
    Gridworld,
    Chain { n: usize },
    Figure1 { p: f64 },
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Gridworld => "gridworld",
            Experiment::Chain { .. } => "chain",
            Experiment::Figure1 { .. } => "figure1",
        }
    }

    /// The model the learner samples from. The gridworld is paired with its
    /// automaton; the others carry their objective directly.
    pub fn model(&self) -> Result<Mdp> {
        Ok(match self {
            Experiment::Gridworld => ProductMdp::build(&gridworld::mdp(), &gridworld::automaton())?.into_mdp(),
            Experiment::Chain { n } => chain::mdp(*n),
            Experiment::Figure1 { p } => figure1::mdp(*p),
        })
    }

    /// State count used in the sample-size formulas.
    pub fn reported_states(&self, model: &Mdp) -> usize {
        match self {
            Experiment::Chain { n: 8 } => chain::REPORTED_STATES,
            _ => model.num_states(),
        }
    }

    /// Episode length used when none is given.
    pub fn default_horizon(&self) -> usize {
        match self {
            Experiment::Gridworld => 19,
            Experiment::Chain { n } => *n,
            Experiment::Figure1 { .. } => 5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub epsilon: f64,
    pub delta: f64,
    pub horizon: Option<usize>,
    /// Known thresholds to run; empty means the theoretical value.
    pub k_values: Vec<u64>,
    pub runs: usize,
    pub seed: u64,
    pub max_episodes: u64,
    /// Adds a wall-time column. Makes the output non-reproducible.
    pub timings: bool,
}

impl ExperimentSpec {
    pub fn new(experiment: Experiment, epsilon: f64, delta: f64, runs: usize, seed: u64) -> Self {
        ExperimentSpec {
            experiment,
            epsilon,
            delta,
            horizon: None,
            k_values: Vec::new(),
            runs,
            seed,
            max_episodes: 10_000_000,
            timings: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub experiment: String,
    pub states: usize,
    pub reported_states: usize,
    pub actions: usize,
    pub horizon: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub optimal_value: f64,
    pub theoretical_k: u64,
    pub mistake_bound: u64,
    pub k_values: Vec<u64>,
    pub runs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRow {
    pub run: usize,
    pub seed: u64,
    pub k: u64,
    pub terminated: bool,
    pub episodes: u64,
    pub samples: u64,
    pub unknown_visits: u64,
    pub returned_value: f64,
    /// Figure-1 only: first episode in which `s0 -b-> s1` was sampled.
    pub first_observed_episode: Option<u64>,
    pub wall_time_s: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub summary: ExperimentSummary,
    pub rows: Vec<RunRow>,
}

/// Wraps an MDP and remembers the first episode in which a given
/// transition occurs.
struct Watch<'a> {
    mdp: &'a Mdp,
    horizon: u64,
    transition: (usize, usize, usize),
    steps: Cell<u64>,
    seen: Cell<Option<u64>>,
}

impl Environment for Watch<'_> {
    fn initial(&self) -> usize {
        self.mdp.initial()
    }

    fn enabled_actions(&self, s: usize) -> Vec<usize> {
        self.mdp.enabled(s).collect()
    }

    fn step(&self, s: usize, a: usize, rng: &mut crate::Rng) -> usize {
        let t = Environment::step(self.mdp, s, a, rng);
        let step = self.steps.get();
        if self.seen.get().is_none() && (s, a, t) == self.transition {
            self.seen.set(Some(step / self.horizon));
        }
        self.steps.set(step + 1);
        t
    }

    fn mark(&self, s: usize) -> StateMark {
        self.mdp.acceptance().mark(s)
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    if spec.runs == 0 {
        return Err(Error::InvalidParameter("at least one run is required".into()));
    }
    let model = spec.experiment.model()?;
    model.validate().into_result()?;
    let horizon = spec.horizon.unwrap_or_else(|| spec.experiment.default_horizon());
    let n = spec.experiment.reported_states(&model);
    let actions = model.num_actions();
    let theoretical_k = known_threshold_k(n, actions, horizon, spec.epsilon, spec.delta)?;
    let k_values = if spec.k_values.is_empty() { vec![theoretical_k] } else { spec.k_values.clone() };
    if let Some(&bad) = k_values.iter().find(|&&k| k == 0 || k > theoretical_k) {
        return Err(Error::InvalidParameter(format!("k = {bad} must lie in [1, {theoretical_k}]")));
    }
    let optimal_value = optimal_policy(&model).initial_value(&model);
    let summary = ExperimentSummary {
        experiment: spec.experiment.name().to_string(),
        states: model.num_states(),
        reported_states: n,
        actions,
        horizon,
        epsilon: spec.epsilon,
        delta: spec.delta,
        optimal_value,
        theoretical_k,
        mistake_bound: mistake_bound_c(theoretical_k, n, actions, horizon, spec.epsilon, spec.delta)?,
        k_values: k_values.clone(),
        runs: spec.runs,
    };

    let jobs: Vec<(u64, usize)> = k_values.iter().flat_map(|&k| (0..spec.runs).map(move |r| (k, r))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(k, run)| {
            let seed = spec.seed.wrapping_add(run as u64);
            let mut cfg = LearnerConfig::new(spec.epsilon, spec.delta, horizon, k, seed);
            cfg.max_episodes = spec.max_episodes;
            // only the summary is needed, so keep the trace small
            cfg.trace_stride = u64::MAX;
            let started = Instant::now();
            let (out, first) = match spec.experiment {
                Experiment::Figure1 { .. } => {
                    let watch = Watch {
                        mdp: &model,
                        horizon: horizon as u64,
                        transition: (figure1::S0, figure1::ACTION_B, figure1::S1),
                        steps: Cell::new(0),
                        seen: Cell::new(None),
                    };
                    let out = omega_pac(&watch, &cfg)?;
                    (out, watch.seen.get())
                }
                _ => (omega_pac(&model, &cfg)?, None),
            };
            let elapsed = started.elapsed().as_secs_f64();
            let returned_value = policy_satisfaction_probability(&model, &out.policy.to_positional(&model))?;
            Ok(RunRow {
                run,
                seed,
                k,
                terminated: out.terminated,
                episodes: out.episodes,
                samples: out.samples,
                unknown_visits: out.unknown_visits,
                returned_value,
                first_observed_episode: first,
                wall_time_s: spec.timings.then_some(elapsed),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult { summary, rows })
}

impl ExperimentResult {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let timings = self.rows.iter().any(|r| r.wall_time_s.is_some());
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec![
            "experiment",
            "run",
            "seed",
            "k",
            "terminated",
            "episodes",
            "samples",
            "unknown_visits",
            "returned_value",
            "optimal_value",
            "first_observed_episode",
        ];
        if timings {
            header.push("wall_time_s");
        }
        out.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![
                self.summary.experiment.clone(),
                r.run.to_string(),
                r.seed.to_string(),
                r.k.to_string(),
                r.terminated.to_string(),
                r.episodes.to_string(),
                r.samples.to_string(),
                r.unknown_visits.to_string(),
                r.returned_value.to_string(),
                self.summary.optimal_value.to_string(),
                r.first_observed_episode.map(|e| e.to_string()).unwrap_or_default(),
            ];
            if timings {
                rec.push(r.wall_time_s.map(|t| format!("{t:.3}")).unwrap_or_default());
            }
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn all_terminated(&self) -> bool {
        self.rows.iter().all(|r| r.terminated)
    }
}

/// `count` values spaced evenly in log scale from 1 to `max`, rounded and
/// deduplicated.
pub fn log_spaced_k(max: u64, count: usize) -> Vec<u64> {
    if count <= 1 || max <= 1 {
        return vec![max.max(1)];
    }
    let top = (max as f64).ln();
    let mut out: Vec<u64> =
        (0..count).map(|i| ((top * i as f64 / (count - 1) as f64).exp().round() as u64).clamp(1, max)).collect();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure1_rows_in_order_and_reproducible() {
        let mut spec = ExperimentSpec::new(Experiment::Figure1 { p: 0.5 }, 0.25, 0.1, 3, 7);
        spec.k_values = vec![5, 10];
        let a = run_experiment(&spec).unwrap();
        let b = run_experiment(&spec).unwrap();
        assert_eq!(a, b);
        let order: Vec<(u64, usize)> = a.rows.iter().map(|r| (r.k, r.run)).collect();
        assert_eq!(order, vec![(5, 0), (5, 1), (5, 2), (10, 0), (10, 1), (10, 2)]);
        assert!(a.rows.iter().all(|r| r.first_observed_episode.is_some()));
        let mut x = Vec::new();
        let mut y = Vec::new();
        a.write_csv(&mut x).unwrap();
        b.write_csv(&mut y).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn k_above_theoretical_rejected() {
        let mut spec = ExperimentSpec::new(Experiment::Figure1 { p: 0.5 }, 0.25, 0.1, 1, 0);
        spec.k_values = vec![u64::MAX];
        assert!(run_experiment(&spec).is_err());
    }

    #[test]
    fn log_spacing_spans_range() {
        let ks = log_spaced_k(10_000, 5);
        assert_eq!(ks, vec![1, 10, 100, 1000, 10_000]);
    }
}
