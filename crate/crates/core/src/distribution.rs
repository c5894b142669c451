//! Service-time laws for data samples and batches.
//!
//! | Family | Survival `P(T > t)` | Max of `b` copies: mean | variance |
//! |---|---|---|---|
//! | Exponential(μ) | `e^{-μt}`, `t ≥ 0` | `H_b/μ` | `H_b^(2)/μ²` |
//! | ShiftedExponential(μ, Δ) | `e^{-μ(t-Δ)}`, `t ≥ Δ` | `Δ + H_b/μ` | `H_b^(2)/μ²` |
//!
//! Both families are closed under taking the minimum of i.i.d. copies and
//! under the size-dependent batch model (a batch of `s` samples has rate
//! `μ/s` and shift `sΔ`), which is what makes the completion-time moments
//! available in closed form.

use std::fmt;

use crate::error::{Error, Result};
use crate::harmonic::{h1, h2};
use crate::stream::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Exponential,
    ShiftedExponential,
}

/// Exponential or shifted-exponential service-time law.
///
/// An exponential law is stored with a zero shift, so every operation runs
/// the same arithmetic for `Exponential(μ)` and `ShiftedExponential(μ, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceDistribution {
    family: Family,
    rate: f64,
    shift: f64,
}

impl ServiceDistribution {
    pub fn exponential(rate: f64) -> Result<Self> {
        check_rate(rate)?;
        Ok(Self {
            family: Family::Exponential,
            rate,
            shift: 0.0,
        })
    }

    pub fn shifted_exponential(rate: f64, shift: f64) -> Result<Self> {
        check_rate(rate)?;
        if !(shift.is_finite() && shift >= 0.0) {
            return Err(Error::invalid(format!(
                "shift must be finite and non-negative, got {shift}"
            )));
        }
        Ok(Self {
            family: Family::ShiftedExponential,
            rate,
            shift,
        })
    }

    fn with_params(self, rate: f64, shift: f64) -> Self {
        Self {
            family: self.family,
            rate,
            shift,
        }
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Minimum possible service time; zero for the exponential family.
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn mean(&self) -> f64 {
        self.shift + 1.0 / self.rate
    }

    pub fn variance(&self) -> f64 {
        1.0 / (self.rate * self.rate)
    }

    pub fn survival(&self, t: f64) -> f64 {
        if t < self.shift {
            1.0
        } else {
            (-self.rate * (t - self.shift)).exp()
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        1.0 - self.survival(t)
    }

    /// Inverse-transform sample for a uniform `u` in `(0, 1]`.
    pub fn from_uniform(&self, u: f64) -> f64 {
        debug_assert!(u > 0.0 && u <= 1.0);
        self.shift + (-u.ln()) / self.rate
    }

    pub fn sample(&self, stream: &mut RandomStream) -> f64 {
        self.from_uniform(stream.next_open_unit())
    }

    /// Law of a batch of `batch_size` samples under the size-dependent model.
    pub fn batch_service(&self, batch_size: usize) -> Result<Self> {
        if batch_size == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        if batch_size == 1 {
            return Ok(*self);
        }
        let s = batch_size as f64;
        Ok(self.with_params(self.rate / s, self.shift * s))
    }

    /// Exact law of the minimum of `k` i.i.d. copies.
    pub fn min_closure(&self, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("replica count must be at least 1"));
        }
        if k == 1 {
            return Ok(*self);
        }
        Ok(self.with_params(self.rate * k as f64, self.shift))
    }

    /// Exact `(mean, variance)` of the maximum of `b` i.i.d. copies.
    pub fn max_moments(&self, b: usize) -> Result<(f64, f64)> {
        if b == 0 {
            return Err(Error::invalid("max over zero copies is undefined"));
        }
        let mean = self.shift + h1(b) / self.rate;
        let variance = h2(b) / (self.rate * self.rate);
        Ok((mean, variance))
    }
}

fn check_rate(rate: f64) -> Result<()> {
    if rate.is_finite() && rate > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "rate must be finite and positive, got {rate}"
        )))
    }
}

impl fmt::Display for ServiceDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Exponential => write!(f, "Exp(mu={})", self.rate),
            Family::ShiftedExponential => {
                write!(f, "SExp(mu={}, delta={})", self.rate, self.shift)
            }
        }
    }
}

pub fn survival(dist: &ServiceDistribution, t: f64) -> f64 {
    dist.survival(t)
}

pub fn sample(dist: &ServiceDistribution, stream: &mut RandomStream) -> f64 {
    dist.sample(stream)
}

pub fn batch_service_distribution(
    per_sample: &ServiceDistribution,
    batch_size: usize,
) -> Result<ServiceDistribution> {
    per_sample.batch_service(batch_size)
}

pub fn min_closure(dist: &ServiceDistribution, k: usize) -> Result<ServiceDistribution> {
    dist.min_closure(k)
}

pub fn max_moments(dist: &ServiceDistribution, b: usize) -> Result<(f64, f64)> {
    dist.max_moments(b)
}
