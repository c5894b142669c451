//! Test-only oracles, independent of the library's closed forms.
#![allow(dead_code)]

/// Kolmogorov-Smirnov statistic of `samples` against `cdf`.
pub fn ks_statistic(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let lo = f - i as f64 / n;
            let hi = (i + 1) as f64 / n - f;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic one-sample KS critical value `sqrt(-ln(alpha/2) / 2) / sqrt(n)`.
pub fn ks_critical(alpha: f64, n: usize) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// `Σ_{i=1..n} 1/i^p`, summed in the natural order.
pub fn harmonic_oracle(n: usize, p: i32) -> f64 {
    (1..=n).map(|i| 1.0 / (i as f64).powi(p)).sum()
}

/// Single-N mean objective `NΔ/B + H_B/μ`.
pub fn single_n_mean(n: usize, rate: f64, shift: f64, b: usize) -> f64 {
    n as f64 * shift / b as f64 + harmonic_oracle(b, 1) / rate
}

/// `E[max(X, Y)]` for independent exponentials with rates `a`, `b`.
pub fn mean_max_two_exponentials(a: f64, b: f64) -> f64 {
    1.0 / a + 1.0 / b - 1.0 / (a + b)
}

pub fn mean_var(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var, (var / n).sqrt())
}
