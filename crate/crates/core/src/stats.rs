//! Kolmogorov–Smirnov testing, summary statistics and the seeded replication
//! harness.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{Rng, SeedStream};

/// Massey's two-sided 5% critical values for n = 1..=34.
#[allow(clippy::approx_constant)]
const KS_CRITICAL_SMALL: [f64; 34] = [
    0.975, 0.842, 0.708, 0.624, 0.565, 0.521, 0.486, 0.457, 0.432, 0.410, 0.391, 0.375, 0.361,
    0.349, 0.338, 0.328, 0.318, 0.309, 0.301, 0.294, 0.287, 0.281, 0.275, 0.269, 0.264, 0.259,
    0.254, 0.250, 0.246, 0.242, 0.238, 0.234, 0.231, 0.227,
];

/// Minimum sample size accepted by [`ks_test_exp1`].
pub const KS_MIN_SAMPLES: usize = 20;

/// Two-sided 5% critical value of the one-sample K-S statistic.
pub fn ks_critical_5pct(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1..=34 => KS_CRITICAL_SMALL[n - 1],
        _ => 1.358 / (n as f64).sqrt(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub n: usize,
    pub d: f64,
    pub critical: f64,
    pub pass: bool,
    pub reference: String,
}

/// D = sup |F_n - F| for a continuous reference CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64, reference: &str) -> Result<KsReport> {
    if samples.is_empty() {
        return Err(Error::InsufficientData(
            "K-S test on an empty sample".into(),
        ));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::InsufficientData("K-S sample contains NaN".into()));
    }
    let n = samples.len();
    let d = ks_statistic(samples, cdf);
    let critical = ks_critical_5pct(n);
    Ok(KsReport {
        n,
        d,
        critical,
        pass: d < critical,
        reference: reference.to_string(),
    })
}

/// K-S test against the unit exponential law.
pub fn ks_test_exp1(samples: &[f64]) -> Result<KsReport> {
    if samples.len() < KS_MIN_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "K-S test needs at least {KS_MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    ks_test(
        samples,
        |x| if x <= 0.0 { 0.0 } else { -(-x).exp_m1() },
        "exp(1)",
    )
}

/// Streaming mean and variance, mergeable in a fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub n: u64,
    pub mean: f64,
    m2: f64,
}

impl Summary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut s = Self::new();
        for &x in xs {
            s.push(x);
        }
        s
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, o: &Summary) {
        if o.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *o;
            return;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        self.mean += d * o.n as f64 / n as f64;
        self.m2 += o.m2 + d * d * self.n as f64 * o.n as f64 / n as f64;
        self.n = n;
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_err(&self) -> f64 {
        if self.n == 0 {
            f64::INFINITY
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }

    /// Normal-approximation 95% confidence interval.
    pub fn ci95(&self) -> (f64, f64) {
        let h = 1.959_963_984_540_054 * self.std_err();
        (self.mean - h, self.mean + h)
    }

    /// True if `value` lies within `k` standard errors of the mean.
    pub fn within(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_err()
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Empirical CDF evaluated at its own sorted sample points.
pub fn ecdf(samples: &[f64]) -> Vec<(f64, f64)> {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.into_iter()
        .enumerate()
        .map(|(i, x)| (x, (i as f64 + 1.0) / n))
        .collect()
}

/// Mean with 95% interval and per-replication failures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub summary: Summary,
    pub ci95: (f64, f64),
    pub failures: Vec<(u64, String)>,
}

/// Runs `replications` copies of `experiment`, replication `i` seeded from
/// `seeds.rng(i)`. Results are collected by index and folded in index order,
/// so the aggregate does not depend on thread scheduling.
pub fn mc_harness<T, F>(replications: u64, seeds: SeedStream, experiment: F) -> Vec<Result<T>>
where
    T: Send,
    F: Fn(u64, &mut Rng) -> Result<T> + Sync,
{
    (0..replications)
        .into_par_iter()
        .map(|i| experiment(i, &mut seeds.rng(i)))
        .collect()
}

/// Scalar harness: aggregates one number per replication.
pub fn mc_mean<F>(replications: u64, seeds: SeedStream, experiment: F) -> Aggregate
where
    F: Fn(u64, &mut Rng) -> Result<f64> + Sync,
{
    let results = mc_harness(replications, seeds, experiment);
    let mut summary = Summary::new();
    let mut failures = Vec::new();
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(x) => summary.push(x),
            Err(e) => failures.push((i as u64, e.to_string())),
        }
    }
    Aggregate {
        ci95: summary.ci95(),
        summary,
        failures,
    }
}

/// Ratio estimator Σx/Σy with a delta-method standard error over replications.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub value: f64,
    pub std_err: f64,
    pub replications: usize,
}

pub fn ratio_estimate(pairs: &[(f64, f64)]) -> RatioEstimate {
    let n = pairs.len();
    let sx: f64 = pairs.iter().map(|p| p.0).sum();
    let sy: f64 = pairs.iter().map(|p| p.1).sum();
    let value = sx / sy;
    if n < 2 {
        return RatioEstimate {
            value,
            std_err: f64::INFINITY,
            replications: n,
        };
    }
    let ybar = sy / n as f64;
    let resid: f64 = pairs
        .iter()
        .map(|&(x, y)| (x - value * y).powi(2))
        .sum::<f64>()
        / (n - 1) as f64;
    RatioEstimate {
        value,
        std_err: (resid / n as f64).sqrt() / ybar,
        replications: n,
    }
}
