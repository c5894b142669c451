//! Exact harmonic numbers of order one and two.
//!
//! `H_n = Σ 1/i` and `H_n^(2) = Σ 1/i²` are the mean and variance kernels of
//! the maximum of `n` i.i.d. unit-rate exponentials. Values are computed by
//! direct summation, smallest term first, and memoized per `(n, order)`.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicValue {
    pub n: u64,
    pub order: u32,
    pub value: f64,
}

fn cache() -> &'static RwLock<HashMap<(u64, u32), f64>> {
    static CACHE: OnceLock<RwLock<HashMap<(u64, u32), f64>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn partial_sum(n: u64, order: u32) -> f64 {
    (1..=n).rev().fold(0.0, |acc, i| {
        let i = i as f64;
        acc + 1.0 / i.powi(order as i32)
    })
}

/// Generalized harmonic number `Σ_{i=1..n} 1/i^order` for `order` in {1, 2}.
pub fn harmonic(n: u64, order: u32) -> Result<HarmonicValue> {
    if n == 0 {
        return Err(Error::invalid("harmonic number requires n >= 1"));
    }
    if !matches!(order, 1 | 2) {
        return Err(Error::invalid(format!(
            "harmonic order must be 1 or 2, got {order}"
        )));
    }
    let key = (n, order);
    if let Some(&value) = cache().read().unwrap().get(&key) {
        return Ok(HarmonicValue { n, order, value });
    }
    let value = partial_sum(n, order);
    cache().write().unwrap().insert(key, value);
    Ok(HarmonicValue { n, order, value })
}

/// `H_n`; panics on `n == 0`. Internal shorthand for callers that already
/// validated their counts.
pub(crate) fn h1(n: usize) -> f64 {
    harmonic(n as u64, 1).expect("n >= 1").value
}

pub(crate) fn h2(n: usize) -> f64 {
    harmonic(n as u64, 2).expect("n >= 1").value
}
