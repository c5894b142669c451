//! Datasets, batching plans, and batch-to-worker assignments.
//!
//! Sample count `D` and worker count `W` are kept separate; the classic
//! single-`N` setting is `D = W = N`. Every worker hosts exactly one batch and
//! all batches in a plan have the same size.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetSpec {
    num_samples: usize,
}

impl DatasetSpec {
    pub fn new(num_samples: usize) -> Result<Self> {
        if num_samples == 0 {
            return Err(Error::invalid("dataset must contain at least one sample"));
        }
        Ok(Self { num_samples })
    }

    pub fn num_samples(&self) -> usize {
        self.num_samples
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchingKind {
    NonOverlapping,
    Overlapping,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchingPlan {
    dataset: DatasetSpec,
    batches: Vec<Vec<usize>>,
    kind: BatchingKind,
}

impl BatchingPlan {
    /// `num_batches` contiguous, disjoint batches of `D / num_batches` samples.
    pub fn non_overlapping(dataset: DatasetSpec, num_batches: usize) -> Result<Self> {
        let d = dataset.num_samples();
        if num_batches == 0 || !d.is_multiple_of(num_batches) {
            return Err(Error::Divisibility {
                divisor_name: "B",
                divisor: num_batches,
                dividend_name: "D",
                dividend: d,
            });
        }
        let size = d / num_batches;
        let batches = (0..num_batches)
            .map(|i| (i * size..(i + 1) * size).collect())
            .collect();
        Ok(Self {
            dataset,
            batches,
            kind: BatchingKind::NonOverlapping,
        })
    }

    /// Cyclic windows: batch `i` holds `(i * stride + m) mod D` for
    /// `m < batch_size`, with `stride = ceil(D / num_batches)`.
    pub fn shingled(dataset: DatasetSpec, num_batches: usize, batch_size: usize) -> Result<Self> {
        let d = dataset.num_samples();
        if num_batches == 0 {
            return Err(Error::invalid("number of batches must be at least 1"));
        }
        if batch_size > d {
            return Err(Error::invalid(format!(
                "batch_size={batch_size} exceeds dataset size D={d}"
            )));
        }
        let stride = d.div_ceil(num_batches);
        if batch_size <= stride {
            return Err(Error::NoOverlap { batch_size, stride });
        }
        if batch_size == d {
            return Err(Error::invalid(format!(
                "batch_size={batch_size} equals D; every batch would be the full dataset"
            )));
        }
        let batches = (0..num_batches)
            .map(|i| (0..batch_size).map(|m| (i * stride + m) % d).collect())
            .collect();
        Ok(Self {
            dataset,
            batches,
            kind: BatchingKind::Overlapping,
        })
    }

    /// Validates arbitrary batches (e.g. loaded from a plan file) and infers
    /// their kind.
    pub fn from_batches(dataset: DatasetSpec, batches: Vec<Vec<usize>>) -> Result<Self> {
        let d = dataset.num_samples();
        if batches.is_empty() {
            return Err(Error::invalid("plan must contain at least one batch"));
        }
        let size = batches[0].len();
        let mut sets = Vec::with_capacity(batches.len());
        for (i, batch) in batches.iter().enumerate() {
            if batch.len() != size || size == 0 {
                return Err(Error::invalid(format!(
                    "all batches must share one non-zero size; batch 0 has {size}, batch {i} has {}",
                    batch.len()
                )));
            }
            if let Some(&bad) = batch.iter().find(|&&s| s >= d) {
                return Err(Error::invalid(format!(
                    "batch {i} references sample {bad}, but D={d}"
                )));
            }
            let set: BTreeSet<usize> = batch.iter().copied().collect();
            if set.len() != batch.len() {
                return Err(Error::invalid(format!("batch {i} repeats a sample")));
            }
            sets.push(set);
        }
        let covered: BTreeSet<usize> = sets.iter().flatten().copied().collect();
        if covered.len() != d {
            let missing: Vec<usize> = (0..d).filter(|s| !covered.contains(s)).collect();
            return Err(Error::invalid(format!(
                "batches do not cover samples {missing:?}"
            )));
        }

        let mut disjoint = true;
        let mut partial = false;
        for (i, a) in sets.iter().enumerate() {
            for b in &sets[i + 1..] {
                let shared = a.intersection(b).count();
                if shared > 0 {
                    disjoint = false;
                    if shared < size {
                        partial = true;
                    }
                }
            }
        }
        let kind = if disjoint {
            BatchingKind::NonOverlapping
        } else if partial {
            BatchingKind::Overlapping
        } else {
            return Err(Error::invalid(
                "batches overlap only as exact duplicates; merge them or make the overlap partial",
            ));
        };
        Ok(Self {
            dataset,
            batches,
            kind,
        })
    }

    pub fn dataset(&self) -> DatasetSpec {
        self.dataset
    }

    pub fn num_samples(&self) -> usize {
        self.dataset.num_samples()
    }

    pub fn batches(&self) -> &[Vec<usize>] {
        &self.batches
    }

    pub fn num_batches(&self) -> usize {
        self.batches.len()
    }

    pub fn batch_size(&self) -> usize {
        self.batches[0].len()
    }

    pub fn kind(&self) -> BatchingKind {
        self.kind
    }

    /// For each sample, the indices of the batches that contain it.
    pub fn batches_by_sample(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_samples()];
        for (b, batch) in self.batches.iter().enumerate() {
            for &s in batch {
                out[s].push(b);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentPlan {
    num_batches: usize,
    worker_to_batch: Vec<usize>,
}

impl AssignmentPlan {
    /// Workers `0..W/B` host batch 0, the next `W/B` host batch 1, and so on.
    pub fn balanced(batching: &BatchingPlan, num_workers: usize) -> Result<Self> {
        let b = batching.num_batches();
        if num_workers == 0 || !num_workers.is_multiple_of(b) {
            return Err(Error::Divisibility {
                divisor_name: "B",
                divisor: b,
                dividend_name: "W",
                dividend: num_workers,
            });
        }
        let per_batch = num_workers / b;
        let worker_to_batch = (0..num_workers).map(|j| j / per_batch).collect();
        Ok(Self {
            num_batches: b,
            worker_to_batch,
        })
    }

    pub fn explicit(batching: &BatchingPlan, worker_to_batch: Vec<usize>) -> Result<Self> {
        let b = batching.num_batches();
        if worker_to_batch.is_empty() {
            return Err(Error::invalid("assignment needs at least one worker"));
        }
        if let Some((j, &bad)) = worker_to_batch.iter().enumerate().find(|(_, &x)| x >= b) {
            return Err(Error::invalid(format!(
                "worker {j} is assigned batch {bad}, but the plan has only {b} batches"
            )));
        }
        let mut hosted = vec![false; b];
        for &x in &worker_to_batch {
            hosted[x] = true;
        }
        let missing: Vec<usize> = (0..b).filter(|&i| !hosted[i]).collect();
        if !missing.is_empty() {
            return Err(Error::IncompleteAssignment { missing });
        }
        Ok(Self {
            num_batches: b,
            worker_to_batch,
        })
    }

    pub fn num_workers(&self) -> usize {
        self.worker_to_batch.len()
    }

    pub fn num_batches(&self) -> usize {
        self.num_batches
    }

    pub fn worker_to_batch(&self) -> &[usize] {
        &self.worker_to_batch
    }

    /// Number of workers hosting each batch.
    pub fn replication_profile(&self) -> Vec<usize> {
        let mut profile = vec![0; self.num_batches];
        for &b in &self.worker_to_batch {
            profile[b] += 1;
        }
        profile
    }

    pub fn is_balanced(&self) -> bool {
        let profile = self.replication_profile();
        profile.iter().all(|&c| c == profile[0])
    }
}

pub fn make_nonoverlapping_batches(
    dataset: DatasetSpec,
    num_batches: usize,
) -> Result<BatchingPlan> {
    BatchingPlan::non_overlapping(dataset, num_batches)
}

pub fn make_shingled_batches(
    dataset: DatasetSpec,
    num_batches: usize,
    batch_size: usize,
) -> Result<BatchingPlan> {
    BatchingPlan::shingled(dataset, num_batches, batch_size)
}

pub fn balanced_assignment(batching: &BatchingPlan, num_workers: usize) -> Result<AssignmentPlan> {
    AssignmentPlan::balanced(batching, num_workers)
}

pub fn explicit_assignment(
    batching: &BatchingPlan,
    worker_to_batch: Vec<usize>,
) -> Result<AssignmentPlan> {
    AssignmentPlan::explicit(batching, worker_to_batch)
}

pub fn replication_profile(plan: &AssignmentPlan) -> Vec<usize> {
    plan.replication_profile()
}

/// On-disk plan layout:
///
/// ```json
/// { "num_samples": 4, "batches": [[0, 1], [2, 3]], "worker_to_batch": [0, 0, 1, 1] }
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub num_samples: usize,
    pub batches: Vec<Vec<usize>>,
    pub worker_to_batch: Vec<usize>,
}

impl PlanFile {
    pub fn from_plans(batching: &BatchingPlan, assignment: &AssignmentPlan) -> Self {
        Self {
            num_samples: batching.num_samples(),
            batches: batching.batches().to_vec(),
            worker_to_batch: assignment.worker_to_batch().to_vec(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::invalid(format!("malformed plan: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn into_plans(self) -> Result<(BatchingPlan, AssignmentPlan)> {
        let dataset = DatasetSpec::new(self.num_samples)?;
        let batching = BatchingPlan::from_batches(dataset, self.batches)?;
        let assignment = AssignmentPlan::explicit(&batching, self.worker_to_batch)?;
        Ok((batching, assignment))
    }
}
