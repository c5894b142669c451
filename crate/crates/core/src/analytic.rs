//! Closed-form completion-time statistics for balanced non-overlapping plans
//! and the exhaustive search over the diversity-parallelism spectrum.
//!
//! With `B` batches of `D/B` samples each hosted by `W/B` workers, a batch is
//! finished when the first of its hosts finishes, and the job when the last
//! batch does. Both service families stay closed under these steps:
//!
//! ```text
//! batch law      = size-dependent law of D/B samples
//! batch winner   = min of W/B copies of the batch law
//! completion     = max of B copies of the batch winner
//! ```
//!
//! giving `mean = DΔ/B + (D/(Wμ))·H_B` and `variance = (D/(Wμ))²·H_B^(2)`.

use num_integer::gcd;
use serde::Serialize;

use crate::distribution::ServiceDistribution;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    num_samples: usize,
    num_workers: usize,
    per_sample: ServiceDistribution,
    num_batches: usize,
}

impl SystemConfig {
    pub fn new(
        num_samples: usize,
        num_workers: usize,
        per_sample: ServiceDistribution,
        num_batches: usize,
    ) -> Result<Self> {
        if num_samples == 0 || num_workers == 0 || num_batches == 0 {
            return Err(Error::invalid(format!(
                "counts must be positive (D={num_samples}, W={num_workers}, B={num_batches})"
            )));
        }
        for (name, value) in [("D", num_samples), ("W", num_workers)] {
            if value % num_batches != 0 {
                return Err(Error::Divisibility {
                    divisor_name: "B",
                    divisor: num_batches,
                    dividend_name: name,
                    dividend: value,
                });
            }
        }
        Ok(Self {
            num_samples,
            num_workers,
            per_sample,
            num_batches,
        })
    }

    pub fn num_samples(&self) -> usize {
        self.num_samples
    }

    pub fn num_workers(&self) -> usize {
        self.num_workers
    }

    pub fn per_sample(&self) -> ServiceDistribution {
        self.per_sample
    }

    pub fn num_batches(&self) -> usize {
        self.num_batches
    }

    pub fn batch_size(&self) -> usize {
        self.num_samples / self.num_batches
    }

    pub fn replicas_per_batch(&self) -> usize {
        self.num_workers / self.num_batches
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompletionStats {
    pub mean: f64,
    pub variance: f64,
}

impl CompletionStats {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub num_batches: usize,
    pub stats: CompletionStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Objective {
    Mean,
    Variance,
}

impl Objective {
    pub fn of(&self, stats: &CompletionStats) -> f64 {
        match self {
            Objective::Mean => stats.mean,
            Objective::Variance => stats.variance,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub best_batches: usize,
    pub best_value: f64,
    pub sweep: Vec<SweepPoint>,
}

/// Batch counts dividing both `D` and `W`, ascending. Always contains 1.
pub fn feasible_batch_counts(num_samples: usize, num_workers: usize) -> Vec<usize> {
    let g = gcd(num_samples, num_workers);
    if g == 0 {
        return Vec::new();
    }
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut i = 1;
    while i * i <= g {
        if g.is_multiple_of(i) {
            small.push(i);
            if i != g / i {
                large.push(g / i);
            }
        }
        i += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

pub fn completion_stats_balanced(config: &SystemConfig) -> Result<CompletionStats> {
    let batch_law = config.per_sample.batch_service(config.batch_size())?;
    let winner = batch_law.min_closure(config.replicas_per_batch())?;
    let (mean, variance) = winner.max_moments(config.num_batches)?;
    Ok(CompletionStats { mean, variance })
}

pub fn sweep(
    num_samples: usize,
    num_workers: usize,
    per_sample: ServiceDistribution,
) -> Result<Vec<SweepPoint>> {
    if num_samples == 0 || num_workers == 0 {
        return Err(Error::invalid("D and W must be at least 1"));
    }
    feasible_batch_counts(num_samples, num_workers)
        .into_iter()
        .map(|b| {
            let config = SystemConfig::new(num_samples, num_workers, per_sample, b)?;
            Ok(SweepPoint {
                num_batches: b,
                stats: completion_stats_balanced(&config)?,
            })
        })
        .collect()
}

/// Exhaustive minimization over the feasible batch counts. Ties go to the
/// smaller `B`.
pub fn optimize_redundancy(
    num_samples: usize,
    num_workers: usize,
    per_sample: ServiceDistribution,
    objective: Objective,
) -> Result<Optimum> {
    let sweep = sweep(num_samples, num_workers, per_sample)?;
    let mut best = &sweep[0];
    for point in &sweep[1..] {
        if objective.of(&point.stats) < objective.of(&best.stats) {
            best = point;
        }
    }
    Ok(Optimum {
        best_batches: best.num_batches,
        best_value: objective.of(&best.stats),
        sweep,
    })
}
