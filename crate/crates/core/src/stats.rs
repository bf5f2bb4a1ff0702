//! Distribution-comparison and Monte Carlo inference utilities shared by the
//! verification suites.

use std::collections::BTreeMap;

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("empirical distribution is empty")]
    Empty,
    #[error("need at least two samples")]
    TooFewSamples,
    #[error("reference distribution is degenerate")]
    DegenerateReference,
}

/// Counts of canonical keys observed by a sampler.
#[derive(Debug, Clone, Default)]
pub struct EmpiricalDistribution<K: Ord> {
    counts: BTreeMap<K, u64>,
    total: u64,
}

impl<K: Ord> EmpiricalDistribution<K> {
    pub fn new() -> Self {
        EmpiricalDistribution {
            counts: BTreeMap::new(),
            total: 0,
        }
    }

    pub fn record(&mut self, key: K) {
        *self.counts.entry(key).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn counts(&self) -> &BTreeMap<K, u64> {
        &self.counts
    }

    pub fn frequency(&self, key: &K) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        *self.counts.get(key).unwrap_or(&0) as f64 / self.total as f64
    }
}

impl<K: Ord> FromIterator<K> for EmpiricalDistribution<K> {
    fn from_iter<I: IntoIterator<Item = K>>(iter: I) -> Self {
        let mut dist = Self::new();
        for key in iter {
            dist.record(key);
        }
        dist
    }
}

/// Total variation distance `max_A |P(A) - Q(A)| = sum |p - q| / 2` between
/// an empirical distribution and an exact probability map.
pub fn tv_distance<K: Ord>(
    emp: &EmpiricalDistribution<K>,
    exact: &BTreeMap<K, f64>,
) -> Result<f64, StatsError> {
    if emp.total() == 0 {
        return Err(StatsError::Empty);
    }
    let n = emp.total() as f64;
    let mut sum = 0.0;
    for (key, &count) in emp.counts() {
        let p = count as f64 / n;
        let q = exact.get(key).copied().unwrap_or(0.0);
        sum += (p - q).abs();
    }
    for (key, &q) in exact {
        if !emp.counts().contains_key(key) {
            sum += q;
        }
    }
    Ok(sum / 2.0)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChiSquaredResult {
    pub statistic: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

/// Pearson goodness-of-fit test of observed counts against exact cell
/// probabilities. Cells with expected count below 5 are pooled into a single
/// remainder cell.
pub fn chi_squared_test<K: Ord>(
    emp: &EmpiricalDistribution<K>,
    exact: &BTreeMap<K, f64>,
) -> Result<ChiSquaredResult, StatsError> {
    if emp.total() == 0 {
        return Err(StatsError::Empty);
    }
    let n = emp.total() as f64;
    let mut cells: Vec<(f64, f64)> = Vec::new(); // (observed, expected)
    let mut pooled_obs = 0.0;
    let mut pooled_exp = 0.0;
    let mut seen_mass = 0.0;
    let mut seen_obs = 0.0;
    for (key, &q) in exact {
        let observed = *emp.counts().get(key).unwrap_or(&0) as f64;
        let expected = q * n;
        seen_mass += q;
        seen_obs += observed;
        if expected < 5.0 {
            pooled_obs += observed;
            pooled_exp += expected;
        } else {
            cells.push((observed, expected));
        }
    }
    // Observations outside the reference support join the pooled cell, as
    // does any remaining reference mass.
    pooled_obs += n - seen_obs;
    pooled_exp += (1.0 - seen_mass).max(0.0) * n;
    if pooled_exp > 0.0 {
        cells.push((pooled_obs, pooled_exp));
    } else if pooled_obs > 0.0 {
        // Impossible outcomes observed.
        return Ok(ChiSquaredResult {
            statistic: f64::INFINITY,
            degrees_of_freedom: cells.len().saturating_sub(1).max(1),
            p_value: 0.0,
        });
    }
    if cells.len() < 2 {
        return Err(StatsError::DegenerateReference);
    }
    let statistic: f64 = cells
        .iter()
        .map(|&(o, e)| (o - e) * (o - e) / e)
        .sum();
    let df = cells.len() - 1;
    let dist = ChiSquared::new(df as f64).expect("positive degrees of freedom");
    let p_value = 1.0 - dist.cdf(statistic);
    Ok(ChiSquaredResult {
        statistic,
        degrees_of_freedom: df,
        p_value,
    })
}

/// Sample mean with normal-approximation confidence half-width.
pub fn mc_mean_ci(samples: &[f64], confidence: f64) -> Result<(f64, f64), StatsError> {
    if samples.len() < 2 {
        return Err(StatsError::TooFewSamples);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let z = normal.inverse_cdf(0.5 + confidence / 2.0);
    Ok((mean, z * (var / n).sqrt()))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample Kolmogorov-Smirnov test against the uniform distribution on
/// `[0, 1]`, with the Stephens small-sample correction for the asymptotic
/// p-value.
pub fn ks_test_uniform(samples: &[f64]) -> Result<KsResult, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::Empty);
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let cdf = x.clamp(0.0, 1.0);
        let hi = (i + 1) as f64 / n - cdf;
        let lo = cdf - i as f64 / n;
        d = d.max(hi).max(lo);
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let k = k as f64;
        let term = 2.0 * (-1.0f64).powi(k as i32 - 1) * (-2.0 * k * k * lambda * lambda).exp();
        p += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    Ok(KsResult {
        statistic: d,
        p_value: p.clamp(0.0, 1.0),
    })
}

/// Z-score of an observed success count against Binomial(n, p).
pub fn binomial_z(successes: u64, trials: u64, p: f64) -> f64 {
    let n = trials as f64;
    let sd = (n * p * (1.0 - p)).sqrt();
    if sd == 0.0 {
        return if successes as f64 == n * p { 0.0 } else { f64::INFINITY };
    }
    (successes as f64 - n * p) / sd
}

/// Z-score of the difference between two observed proportions.
pub fn two_proportion_z(s1: u64, n1: u64, s2: u64, n2: u64) -> f64 {
    let p1 = s1 as f64 / n1 as f64;
    let p2 = s2 as f64 / n2 as f64;
    let pooled = (s1 + s2) as f64 / (n1 + n2) as f64;
    let sd = (pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    if sd == 0.0 {
        return 0.0;
    }
    (p1 - p2) / sd
}

/// Machine-readable report for one statistical check.
#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub test: String,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub pass: bool,
}

impl TestReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}
