//! The optimistic-model learner and its statistical companions.

pub mod bounds;
pub mod counts;
pub mod estimate;
pub mod omega_pac;
pub mod optimistic;

pub use bounds::{known_threshold_k, mistake_bound_c, required_samples_c};
pub use counts::VisitCounts;
pub use estimate::{classify_path, classify_trajectory, estimate_satisfaction_mc, SatisfactionEstimate, TrajectoryGraph};
pub use omega_pac::{omega_pac, omega_pac_with, LearnOutcome, LearnTrace, LearnedPolicy, LearnerConfig, TraceRow};
pub use optimistic::{build_optimistic, OptimisticModel};
