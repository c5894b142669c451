//! Redundancy planning for master-worker computations with stragglers.
//!
//! A dataset of `D` samples is cut into `B` equal batches and each of `W`
//! workers hosts one batch. The job completes once finished workers jointly
//! cover every sample. This crate computes the exact completion-time mean and
//! variance for balanced non-overlapping plans, searches the feasible batch
//! counts for the best redundancy level, and validates both against a
//! reproducible Monte Carlo simulator that also handles unbalanced and
//! overlapping plans.

pub mod analytic;
pub mod cli;
pub mod distribution;
pub mod error;
pub mod harmonic;
pub mod monte_carlo;
pub mod replication;
pub mod stream;

pub use analytic::{
    completion_stats_balanced, feasible_batch_counts, optimize_redundancy, CompletionStats,
    Objective, Optimum, SweepPoint, SystemConfig,
};
pub use distribution::{Family, ServiceDistribution};
pub use error::{Error, Result};
pub use harmonic::{harmonic, HarmonicValue};
pub use monte_carlo::{
    compare_policies, simulate_completion, Comparison, PairwiseDifference, SimulationSpec,
    SimulationSummary,
};
pub use replication::{AssignmentPlan, BatchingKind, BatchingPlan, DatasetSpec, PlanFile};
pub use stream::RandomStream;
