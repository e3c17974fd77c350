//! `omega-pac`: solve, learn and measure recurrence times on MDP models.
//!
//! Exit codes: 0 on success, 1 on I/O failures, 2 when a model, automaton,
//! policy or parameter is rejected, 3 when learning hits the episode cap.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use omega_pac::automata::{OmegaAutomaton, ProductMdp};
use omega_pac::experiments::runner::{log_spaced_k, run_experiment, Experiment, ExperimentSpec};
use omega_pac::experiments::{chain, figure1, gridworld};
use omega_pac::io::{model_from_json, model_to_json};
use omega_pac::learner::{
    estimate_satisfaction_mc, known_threshold_k, mistake_bound_c, omega_pac_with, LearnedPolicy, LearnerConfig,
};
use omega_pac::recurrence::{
    exact_recurrence_time, mc_recurrence_estimate, mdp_recurrence_time, recurrence_time_bound, MdpRecurrenceMode,
};
use omega_pac::solver::{optimal_policy, policy_satisfaction_probability, policy_values};
use omega_pac::{rng_from_seed, Mdp, PositionalPolicy};

#[derive(Parser)]
#[command(name = "omega-pac", version, about = "PAC learning and exact analysis for omega-regular objectives in MDPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal satisfaction probabilities and an optimal positional policy.
    Solve(SolveArgs),
    /// Run the learner against a known model used as a simulator.
    Learn(LearnArgs),
    /// Epsilon-recurrence time of a model or of one policy.
    Recurrence(RecurrenceArgs),
    /// Trajectory-based estimate of a policy's satisfaction probability.
    Estimate(EstimateArgs),
    /// Repeated learner runs on a built-in example, written as CSV.
    Experiment(ExperimentArgs),
    /// Write a built-in example model (and its automaton) as JSON.
    Export(ExportArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Model in the JSON format.
    #[arg(long)]
    model: PathBuf,
    /// Deterministic omega-automaton; the objective becomes the product.
    #[arg(long)]
    automaton: Option<PathBuf>,
    /// Rescale rows that do not sum to 1 instead of rejecting them.
    #[arg(long)]
    renormalize: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RecurrenceMode {
    /// Exact maximum over all positional policies.
    Exact,
    /// Sampled policies with Monte-Carlo evaluation of large BSCCs.
    Mc,
    /// Closed-form bound from the state count and minimum probability.
    Bound,
}

#[derive(Args)]
struct LearnArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_parser = parse_fraction)]
    epsilon: f64,
    #[arg(long, value_parser = parse_fraction)]
    delta: f64,
    /// Episode length; computed from the model when omitted.
    #[arg(long = "T", visible_alias = "horizon")]
    horizon: Option<usize>,
    /// How to compute T when it is not given.
    #[arg(long, value_enum, default_value = "exact")]
    recurrence_mode: RecurrenceMode,
    /// Known threshold; the theoretical value when omitted.
    #[arg(long)]
    k: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000_000)]
    max_episodes: u64,
    /// Record every n-th episode in the trace.
    #[arg(long, default_value_t = 1)]
    trace_stride: u64,
    /// Trace CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RecurrenceArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_parser = parse_fraction)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "exact")]
    mode: RecurrenceMode,
    /// Evaluate only this policy (JSON array of action names or indices).
    #[arg(long)]
    policy: Option<PathBuf>,
    /// Give up beyond this horizon.
    #[arg(long, default_value_t = 1_000_000)]
    cap: usize,
    /// Policies drawn in `mc` mode.
    #[arg(long, default_value_t = 1000)]
    policies: usize,
    /// Runs per Monte-Carlo evaluation.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Policy to estimate; the solver-optimal one when omitted.
    #[arg(long)]
    policy: Option<PathBuf>,
    #[arg(long, value_parser = parse_fraction)]
    epsilon: f64,
    #[arg(long, value_parser = parse_fraction)]
    delta: f64,
    /// Trajectory length; the policy's exact recurrence time when omitted.
    #[arg(long = "T", visible_alias = "horizon")]
    horizon: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentId {
    Gridworld,
    Chain,
    Figure1,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(value_enum)]
    which: ExperimentId,
    /// Escape probability of action b (figure1).
    #[arg(long, value_parser = parse_fraction, default_value = "0.5")]
    p: f64,
    /// Number of chain states.
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Defaults: 1/20 gridworld, 1/60 chain, 1/4 figure1.
    #[arg(long, value_parser = parse_fraction)]
    epsilon: Option<f64>,
    #[arg(long, value_parser = parse_fraction, default_value = "0.1")]
    delta: f64,
    /// Episode length; the example's default when omitted.
    #[arg(long = "T", visible_alias = "horizon")]
    horizon: Option<usize>,
    /// Known threshold; the theoretical value when neither this nor a sweep
    /// is given.
    #[arg(long, conflicts_with_all = ["k_sweep", "k_log"])]
    k: Option<u64>,
    /// Comma-separated list of known thresholds.
    #[arg(long, value_delimiter = ',', conflicts_with = "k_log")]
    k_sweep: Vec<u64>,
    /// This many log-spaced thresholds from 1 to the theoretical value.
    #[arg(long)]
    k_log: Option<usize>,
    #[arg(long, default_value_t = 20)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000_000)]
    max_episodes: u64,
    /// Add a wall-time column (not reproducible).
    #[arg(long)]
    timings: bool,
    /// Output directory for `<name>.csv` and `<name>_summary.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(value_enum)]
    which: ExperimentId,
    #[arg(long, value_parser = parse_fraction, default_value = "0.5")]
    p: f64,
    #[arg(long, default_value_t = 8)]
    n: usize,
    /// Model file; the automaton, if any, goes next to it as
    /// `<stem>.automaton.json`.
    #[arg(long)]
    out: PathBuf,
}

/// Errors that should map to exit code 2.
#[derive(Debug)]
struct Rejected(String);

impl std::fmt::Display for Rejected {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Rejected {}

/// Accepts `0.05`, `1/20` and the like.
fn parse_fraction(s: &str) -> std::result::Result<f64, String> {
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|e| format!("`{s}`: {e}"))?;
            let b: f64 = b.trim().parse().map_err(|e| format!("`{s}`: {e}"))?;
            a / b
        }
        None => s.trim().parse().map_err(|e| format!("`{s}`: {e}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not a finite number"))
    }
}

/// Wraps library errors that describe bad input so they exit with 2.
fn reject<T>(r: omega_pac::Result<T>, what: impl FnOnce() -> String) -> Result<T> {
    r.map_err(|e| match e {
        omega_pac::Error::Io(_) | omega_pac::Error::Csv(_) => anyhow::Error::new(e).context(what()),
        e => anyhow::Error::new(Rejected(format!("{}: {e}", what()))),
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes).context("writing stdout")
        }
    }
}

/// The model the command works on: the MDP itself or its product with the
/// automaton.
fn load(args: &ModelArgs) -> Result<Mdp> {
    let text = read(&args.model)?;
    let m = reject(model_from_json(&text, args.renormalize), || args.model.display().to_string())?;
    let Some(path) = &args.automaton else {
        return Ok(m);
    };
    let aut = reject(OmegaAutomaton::from_json(&read(path)?), || path.display().to_string())?;
    let product = reject(ProductMdp::build(&m, &aut), || "building the product".into())?;
    Ok(product.into_mdp())
}

fn load_policy(m: &Mdp, path: &Path) -> Result<PositionalPolicy> {
    let entries: Vec<serde_json::Value> = serde_json::from_str(&read(path)?)
        .map_err(|e| Rejected(format!("{}: expected a JSON array: {e}", path.display())))?;
    let actions = entries
        .iter()
        .enumerate()
        .map(|(s, v)| match v {
            serde_json::Value::Number(n) => n.as_u64().map(|a| a as usize),
            serde_json::Value::String(name) => m.action_names().iter().position(|x| x == name),
            _ => None,
        }
        .ok_or_else(|| Rejected(format!("{}: entry {s} is not an action", path.display()))))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let pi = PositionalPolicy(actions);
    reject(m.check_policy(&pi), || path.display().to_string())?;
    Ok(pi)
}

fn horizon_for(m: &Mdp, epsilon: f64, mode: RecurrenceMode, seed: u64) -> Result<usize> {
    let t = match mode {
        RecurrenceMode::Bound => {
            reject(recurrence_time_bound(m.num_states(), m.min_positive_probability(), epsilon), || "T".into())?
        }
        RecurrenceMode::Exact | RecurrenceMode::Mc => {
            let how = match mode {
                RecurrenceMode::Exact => MdpRecurrenceMode::Exhaustive,
                _ => MdpRecurrenceMode::Sampled { policies: 1000, mc_samples: 10_000, seed },
            };
            let r = reject(mdp_recurrence_time(m, epsilon, 1_000_000, &how), || "computing T".into())?;
            r.t.ok_or_else(|| Rejected("recurrence time exceeds 10^6; pass --T".into()))?
        }
    };
    Ok(t.max(1))
}

fn solve(args: SolveArgs) -> Result<ExitCode> {
    let m = load(&args.model)?;
    let r = optimal_policy(&m);
    let states: Vec<_> = (0..m.num_states())
        .map(|s| {
            json!({
                "state": m.state_name(s),
                "value": r.value[s],
                "action": m.action_name(r.policy.action(s)),
                "accepting_region": r.accepting_states.contains(&s),
            })
        })
        .collect();
    let out = json!({
        "initial_value": r.initial_value(&m),
        "policy": r.policy.0.iter().map(|&a| m.action_name(a)).collect::<Vec<_>>(),
        "states": states,
    });
    write_out(args.out.as_deref(), format!("{}\n", serde_json::to_string_pretty(&out)?).as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn learn(args: LearnArgs) -> Result<ExitCode> {
    let m = load(&args.model)?;
    let horizon = match args.horizon {
        Some(t) => t,
        None => horizon_for(&m, args.epsilon, args.recurrence_mode, args.seed)?,
    };
    let (n, k_actions) = (m.num_states(), m.num_actions());
    let k = match args.k {
        Some(k) => k,
        None => reject(known_threshold_k(n, k_actions, horizon, args.epsilon, args.delta), || "k".into())?,
    };
    let mut cfg = LearnerConfig::new(args.epsilon, args.delta, horizon, k, args.seed);
    cfg.max_episodes = args.max_episodes;
    cfg.trace_stride = args.trace_stride;
    let evaluate = |p: &LearnedPolicy| policy_satisfaction_probability(&m, &p.to_positional(&m)).unwrap_or(f64::NAN);
    let out = reject(omega_pac_with(&m, &cfg, Some(&evaluate)), || "learning".into())?;

    let mut csv = Vec::new();
    reject(out.trace.write_csv(&mut csv), || "trace".into())?;
    write_out(args.out.as_deref(), &csv)?;

    let value = evaluate(&out.policy);
    let summary = json!({
        "terminated": out.terminated,
        "episodes": out.episodes,
        "samples": out.samples,
        "unknown_visits": out.unknown_visits,
        "horizon": horizon,
        "k": k,
        "mistake_bound": mistake_bound_c(k, n, k_actions, horizon, args.epsilon, args.delta).ok(),
        "optimistic_value": out.optimistic_value,
        "policy_value": value,
        "optimal_value": optimal_policy(&m).initial_value(&m),
    });
    eprintln!("{summary}");
    if !out.terminated {
        eprintln!("learner stopped at the episode cap ({}) without terminating", args.max_episodes);
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn recurrence(args: RecurrenceArgs) -> Result<ExitCode> {
    let m = load(&args.model)?;
    let eps = args.epsilon;
    let bound = reject(recurrence_time_bound(m.num_states(), m.min_positive_probability(), eps), || "bound".into())?;
    let out = if let Some(path) = &args.policy {
        let pi = load_policy(&m, path)?;
        let chain = reject(m.induce_chain(&pi), || "policy".into())?;
        match args.mode {
            RecurrenceMode::Exact => {
                let t = reject(exact_recurrence_time(&chain, eps, args.cap), || "recurrence".into())?;
                json!({ "mode": "exact", "t": t, "bound": bound })
            }
            RecurrenceMode::Mc => {
                let mut rng = rng_from_seed(args.seed);
                let r = reject(mc_recurrence_estimate(&chain, eps, args.samples, args.cap, &mut rng), || {
                    "recurrence".into()
                })?;
                json!({ "mode": "mc", "t": r.t, "fraction": r.fraction, "ci_low": r.ci_low,
                        "ci_high": r.ci_high, "samples": r.samples, "bound": bound })
            }
            RecurrenceMode::Bound => json!({ "mode": "bound", "t": bound }),
        }
    } else {
        let how = match args.mode {
            RecurrenceMode::Bound => {
                let out = json!({ "mode": "bound", "t": bound });
                write_out(None, format!("{out}\n").as_bytes())?;
                return Ok(ExitCode::SUCCESS);
            }
            RecurrenceMode::Exact => MdpRecurrenceMode::Exhaustive,
            RecurrenceMode::Mc => {
                MdpRecurrenceMode::Sampled { policies: args.policies, mc_samples: args.samples, seed: args.seed }
            }
        };
        let r = reject(mdp_recurrence_time(&m, eps, args.cap, &how), || "recurrence".into())?;
        json!({
            "mode": if r.exact { "exact" } else { "mc" },
            "t": r.t,
            "exact": r.exact,
            "policies_evaluated": r.policies_evaluated,
            "worst_policy": r.worst_policy.0.iter().map(|&a| m.action_name(a)).collect::<Vec<_>>(),
            "bound": bound,
        })
    };
    write_out(None, format!("{out}\n").as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn estimate(args: EstimateArgs) -> Result<ExitCode> {
    let m = load(&args.model)?;
    let pi = match &args.policy {
        Some(p) => load_policy(&m, p)?,
        None => optimal_policy(&m).policy,
    };
    let chain = reject(m.induce_chain(&pi), || "policy".into())?;
    let horizon = match args.horizon {
        Some(t) => t,
        None => reject(exact_recurrence_time(&chain, args.epsilon, 1_000_000), || "recurrence".into())?
            .ok_or_else(|| Rejected("recurrence time exceeds 10^6; pass --T".into()))?
            .max(1),
    };
    let mut rng = rng_from_seed(args.seed);
    let est = reject(estimate_satisfaction_mc(&chain, horizon, args.epsilon, args.delta, &mut rng), || {
        "estimate".into()
    })?;
    let exact = reject(policy_values(&m, &pi), || "policy".into())?[m.initial()];
    let out = json!({
        "p_hat": est.p_hat,
        "samples": est.samples,
        "wins": est.wins,
        "half_width": est.half_width,
        "confidence": est.confidence,
        "horizon": horizon,
        "exact_value": exact,
    });
    write_out(None, format!("{out}\n").as_bytes())?;
    Ok(ExitCode::SUCCESS)
}

fn experiment(args: ExperimentArgs) -> Result<ExitCode> {
    let (exp, default_eps) = match args.which {
        ExperimentId::Gridworld => (Experiment::Gridworld, 1.0 / 20.0),
        ExperimentId::Chain => (Experiment::Chain { n: args.n }, 1.0 / 60.0),
        ExperimentId::Figure1 => (Experiment::Figure1 { p: args.p }, 0.25),
    };
    if matches!(exp, Experiment::Chain { n: 0 }) {
        bail!(Rejected("--n must be at least 1".into()));
    }
    if matches!(exp, Experiment::Figure1 { p } if !(p > 0.0 && p <= 1.0)) {
        bail!(Rejected("--p must lie in (0, 1]".into()));
    }
    let mut spec = ExperimentSpec::new(exp, args.epsilon.unwrap_or(default_eps), args.delta, args.runs, args.seed);
    spec.horizon = args.horizon;
    spec.max_episodes = args.max_episodes;
    spec.timings = args.timings;
    spec.k_values = match (args.k, args.k_log) {
        (Some(k), _) => vec![k],
        (None, Some(count)) => {
            let model = reject(spec.experiment.model(), || "experiment".into())?;
            let horizon = spec.horizon.unwrap_or_else(|| spec.experiment.default_horizon());
            let n = spec.experiment.reported_states(&model);
            let theoretical =
                reject(known_threshold_k(n, model.num_actions(), horizon, spec.epsilon, spec.delta), || "k".into())?;
            log_spaced_k(theoretical, count)
        }
        (None, None) => args.k_sweep.clone(),
    };
    let result = reject(run_experiment(&spec), || "experiment".into())?;

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let name = result.summary.experiment.clone();
    let csv_path = args.out.join(format!("{name}.csv"));
    let mut csv = Vec::new();
    reject(result.write_csv(&mut csv), || "csv".into())?;
    fs::write(&csv_path, csv).with_context(|| format!("writing {}", csv_path.display()))?;
    let summary_path = args.out.join(format!("{name}_summary.json"));
    fs::write(&summary_path, format!("{}\n", serde_json::to_string_pretty(&result.summary)?))
        .with_context(|| format!("writing {}", summary_path.display()))?;

    let failed = result.rows.iter().filter(|r| !r.terminated).count();
    eprintln!("wrote {} rows to {}", result.rows.len(), csv_path.display());
    if failed > 0 {
        eprintln!("{failed} run(s) stopped at the episode cap without terminating");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn export(args: ExportArgs) -> Result<ExitCode> {
    let (m, aut) = match args.which {
        ExperimentId::Gridworld => (gridworld::mdp(), Some(gridworld::automaton())),
        ExperimentId::Chain if args.n == 0 => bail!(Rejected("--n must be at least 1".into())),
        ExperimentId::Chain => (chain::mdp(args.n), None),
        ExperimentId::Figure1 if !(args.p > 0.0 && args.p <= 1.0) => bail!(Rejected("--p must lie in (0, 1]".into())),
        ExperimentId::Figure1 => (figure1::mdp(args.p), Some(figure1::automaton())),
    };
    fs::write(&args.out, model_to_json(&m) + "\n").with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(aut) = aut {
        let path = args.out.with_extension("automaton.json");
        fs::write(&path, aut.to_json() + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Learn(a) => learn(a),
        Command::Recurrence(a) => recurrence(a),
        Command::Estimate(a) => estimate(a),
        Command::Experiment(a) => experiment(a),
        Command::Export(a) => export(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<Rejected>()) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
