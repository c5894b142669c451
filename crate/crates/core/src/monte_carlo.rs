//! Seeded Monte Carlo estimation of job completion time.
//!
//! Every worker starts at time zero and draws one service time from the
//! size-dependent law of the batch it hosts. A sample is covered when the
//! first worker holding it finishes; the job completes when every sample is
//! covered. Worker `j` in trial `t` always consumes the uniform drawn from
//! `RandomStream::for_trial_worker(seed, t, j)`, so trials can run in any
//! order (or in parallel) and two policies run with the same seed share
//! their randomness worker by worker.

use rayon::prelude::*;
use serde::Serialize;

use crate::distribution::ServiceDistribution;
use crate::error::{Error, Result};
use crate::replication::{AssignmentPlan, BatchingPlan};
use crate::stream::RandomStream;

/// Two-sided standard normal quantile for 99% coverage.
pub const Z_99: f64 = 2.575_829_303_548_901;

const CHUNK: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    pub batching: BatchingPlan,
    pub assignment: AssignmentPlan,
    pub per_sample: ServiceDistribution,
    pub trials: u64,
    pub seed: u64,
}

impl SimulationSpec {
    pub fn new(
        batching: BatchingPlan,
        assignment: AssignmentPlan,
        per_sample: ServiceDistribution,
        trials: u64,
        seed: u64,
    ) -> Result<Self> {
        let spec = Self {
            batching,
            assignment,
            per_sample,
            trials,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("at least one trial is required"));
        }
        let b = self.batching.num_batches();
        if self.assignment.num_batches() != b
            || self.assignment.worker_to_batch().iter().any(|&x| x >= b)
        {
            return Err(Error::invalid(format!(
                "assignment refers to {} batches but the batching plan has {b}",
                self.assignment.num_batches()
            )));
        }
        if self.assignment.replication_profile().contains(&0) {
            return Err(Error::invalid("assignment leaves a batch unhosted"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

impl SimulationSummary {
    /// Mean and unbiased variance, accumulated in slice order.
    pub fn from_values(values: &[f64], seed: u64) -> Self {
        let n = values.len();
        assert!(n > 0, "summary of zero trials");
        let mean = values.iter().sum::<f64>() / n as f64;
        let variance = if n > 1 {
            values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        Self {
            mean,
            variance,
            std_error: (variance / n as f64).sqrt(),
            trials: n as u64,
            seed,
        }
    }
}

/// Plan flattened into the lookups a trial needs.
struct CompiledPlan {
    worker_batch: Vec<usize>,
    batch_law: ServiceDistribution,
    sample_batches: Vec<Vec<usize>>,
    num_batches: usize,
}

impl CompiledPlan {
    fn new(spec: &SimulationSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            worker_batch: spec.assignment.worker_to_batch().to_vec(),
            batch_law: spec.per_sample.batch_service(spec.batching.batch_size())?,
            sample_batches: spec.batching.batches_by_sample(),
            num_batches: spec.batching.num_batches(),
        })
    }

    fn draw_finish_times(&self, seed: u64, trial: u64, finish: &mut [f64]) {
        for (j, slot) in finish.iter_mut().enumerate() {
            let mut stream = RandomStream::for_trial_worker(seed, trial, j as u64);
            *slot = self.batch_law.from_uniform(stream.next_open_unit());
        }
    }

    fn batch_minima(&self, finish: &[f64], batch_done: &mut [f64]) {
        batch_done.fill(f64::INFINITY);
        for (&b, &t) in self.worker_batch.iter().zip(finish) {
            if t < batch_done[b] {
                batch_done[b] = t;
            }
        }
    }

    fn coverage_time(&self, batch_done: &[f64]) -> f64 {
        self.sample_batches
            .iter()
            .map(|bs| {
                bs.iter()
                    .map(|&b| batch_done[b])
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    fn trial(&self, seed: u64, trial: u64, scratch: &mut Scratch) -> f64 {
        self.draw_finish_times(seed, trial, &mut scratch.finish);
        self.batch_minima(&scratch.finish, &mut scratch.batch_done);
        self.coverage_time(&scratch.batch_done)
    }

    fn scratch(&self) -> Scratch {
        Scratch {
            finish: vec![0.0; self.worker_batch.len()],
            batch_done: vec![0.0; self.num_batches],
        }
    }
}

struct Scratch {
    finish: Vec<f64>,
    batch_done: Vec<f64>,
}

/// Per-trial completion times in trial order.
pub fn trial_values(spec: &SimulationSpec, execution: Execution) -> Result<Vec<f64>> {
    trial_values_seeded(spec, spec.seed, execution)
}

fn trial_values_seeded(spec: &SimulationSpec, seed: u64, execution: Execution) -> Result<Vec<f64>> {
    let plan = CompiledPlan::new(spec)?;
    let trials = spec.trials;
    let run_chunk = |c: u64| {
        let start = c * CHUNK as u64;
        let end = (start + CHUNK as u64).min(trials);
        let mut scratch = plan.scratch();
        (start..end)
            .map(|t| plan.trial(seed, t, &mut scratch))
            .collect::<Vec<f64>>()
    };
    let chunks = trials.div_ceil(CHUNK as u64);
    let per_chunk: Vec<Vec<f64>> = match execution {
        Execution::Serial => (0..chunks).map(run_chunk).collect(),
        Execution::Parallel => (0..chunks).into_par_iter().map(run_chunk).collect(),
    };
    Ok(per_chunk.concat())
}

pub fn simulate_completion(spec: &SimulationSpec) -> Result<SimulationSummary> {
    simulate_completion_with(spec, Execution::default())
}

pub fn simulate_completion_with(
    spec: &SimulationSpec,
    execution: Execution,
) -> Result<SimulationSummary> {
    let values = trial_values(spec, execution)?;
    Ok(SimulationSummary::from_values(&values, spec.seed))
}

/// Completion times of the first `trials` trials computed twice from the same
/// finish times: by sample coverage and by the maximum of per-batch minima.
/// The two agree for non-overlapping plans.
pub fn completion_both_ways(spec: &SimulationSpec, trials: u64) -> Result<Vec<(f64, f64)>> {
    let plan = CompiledPlan::new(spec)?;
    let mut scratch = plan.scratch();
    Ok((0..trials)
        .map(|t| {
            plan.draw_finish_times(spec.seed, t, &mut scratch.finish);
            plan.batch_minima(&scratch.finish, &mut scratch.batch_done);
            let by_coverage = plan.coverage_time(&scratch.batch_done);
            let by_batches = scratch.batch_done.iter().copied().fold(0.0, f64::max);
            (by_coverage, by_batches)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairwiseDifference {
    pub a: usize,
    pub b: usize,
    /// Mean of per-trial `T_a - T_b`.
    pub mean_diff: f64,
    pub std_error: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl PairwiseDifference {
    pub fn excludes_zero(&self) -> bool {
        self.ci_lo > 0.0 || self.ci_hi < 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub summaries: Vec<SimulationSummary>,
    pub pairs: Vec<PairwiseDifference>,
}

impl Comparison {
    /// Index of the policy with the smallest estimated mean.
    pub fn best(&self) -> usize {
        self.summaries
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.mean.total_cmp(&y.1.mean))
            .map(|(i, _)| i)
            .expect("at least two summaries")
    }

    pub fn pair(&self, a: usize, b: usize) -> Option<&PairwiseDifference> {
        self.pairs.iter().find(|p| p.a == a && p.b == b)
    }
}

/// Simulates every spec under `common_seed` (common random numbers) and
/// reports 99% normal-approximation intervals for each pairwise difference
/// of means.
pub fn compare_policies(specs: &[SimulationSpec], common_seed: u64) -> Result<Comparison> {
    compare_policies_with(specs, common_seed, Execution::default())
}

pub fn compare_policies_with(
    specs: &[SimulationSpec],
    common_seed: u64,
    execution: Execution,
) -> Result<Comparison> {
    if specs.len() < 2 {
        return Err(Error::invalid(format!(
            "comparison needs at least 2 policies, got {}",
            specs.len()
        )));
    }
    let first = &specs[0];
    if let Some(i) = specs
        .iter()
        .position(|s| s.trials != first.trials || s.per_sample != first.per_sample)
    {
        return Err(Error::invalid(format!(
            "policy {i} does not share the trial count and service law of policy 0"
        )));
    }
    let values = specs
        .iter()
        .map(|s| trial_values_seeded(s, common_seed, execution))
        .collect::<Result<Vec<_>>>()?;
    let summaries = values
        .iter()
        .map(|v| SimulationSummary::from_values(v, common_seed))
        .collect();
    let mut pairs = Vec::new();
    for a in 0..specs.len() {
        for b in a + 1..specs.len() {
            let diffs: Vec<f64> = values[a]
                .iter()
                .zip(&values[b])
                .map(|(x, y)| x - y)
                .collect();
            let s = SimulationSummary::from_values(&diffs, common_seed);
            pairs.push(PairwiseDifference {
                a,
                b,
                mean_diff: s.mean,
                std_error: s.std_error,
                ci_lo: s.mean - Z_99 * s.std_error,
                ci_hi: s.mean + Z_99 * s.std_error,
            });
        }
    }
    Ok(Comparison { summaries, pairs })
}
