//! The random-paths capacity bound: for a random simple path from a set
//! toward the boundary, the reciprocal of the summed squared edge-inclusion
//! probabilities is a lower bound on the capacity of the set.

use std::collections::HashMap;

use crate::network::{VertexId, WiredQuotient};
use crate::walks::{Walk, WalkRng};

use super::PotentialError;

/// A sampler of simple paths from the source set to the boundary.
pub trait PathDistribution {
    fn sample_path(&self, rng: &mut WalkRng) -> Walk;
}

impl<F: Fn(&mut WalkRng) -> Walk> PathDistribution for F {
    fn sample_path(&self, rng: &mut WalkRng) -> Walk {
        self(rng)
    }
}

#[derive(Debug, Clone)]
pub struct RandomPathBound {
    /// `1 / sum_e P(e in path)^2`, a lower bound on the capacity.
    pub bound: f64,
    /// Unbiased estimate of the summed squared inclusion probabilities.
    pub sum_sq: f64,
    /// 95% half-width on `sum_sq` from batch means.
    pub sum_sq_half_width: f64,
    /// Confidence interval for the bound itself.
    pub bound_interval: (f64, f64),
}

/// Estimates the capacity lower bound from `samples` independent paths drawn
/// from `dist`. Every path must be simple, start in `sources`, and end at the
/// boundary vertex.
///
/// The summed squared inclusion probability is estimated without bias via
/// `sum_e n_e (n_e - 1) / (n (n - 1))` where `n_e` counts paths through `e`.
pub fn random_path_capacity_bound(
    wq: &WiredQuotient,
    sources: &[VertexId],
    dist: &dyn PathDistribution,
    samples: usize,
    rng: &mut WalkRng,
) -> Result<RandomPathBound, PotentialError> {
    if samples < 2 {
        return Err(PotentialError::NoSamples);
    }
    let network = wq.network();
    let mut in_source = vec![false; network.vertex_count()];
    for &v in sources {
        if v >= network.vertex_count() {
            return Err(PotentialError::UnknownVertex(v));
        }
        in_source[v] = true;
    }
    let batches = 20.min(samples / 2).max(1);
    let mut counts: HashMap<usize, u64> = HashMap::new();
    let mut batch_counts: Vec<HashMap<usize, u64>> = vec![HashMap::new(); batches];
    for i in 0..samples {
        let path = dist.sample_path(rng);
        validate_path(wq, &in_source, &path)?;
        for step in &path.steps {
            *counts.entry(step.edge_id).or_insert(0) += 1;
            *batch_counts[i % batches].entry(step.edge_id).or_insert(0) += 1;
        }
    }
    let sum_sq = u_statistic(&counts, samples as u64);
    let per_batch: Vec<f64> = batch_counts
        .iter()
        .enumerate()
        .map(|(b, cs)| {
            let in_batch = (samples / batches + usize::from(b < samples % batches)) as u64;
            u_statistic(cs, in_batch)
        })
        .collect();
    let (_, half_width) = crate::stats::mc_mean_ci(&per_batch, 0.95)
        .unwrap_or((sum_sq, 0.0));
    let bound = if sum_sq > 0.0 { 1.0 / sum_sq } else { f64::INFINITY };
    let hi = if sum_sq - half_width > 0.0 {
        1.0 / (sum_sq - half_width)
    } else {
        f64::INFINITY
    };
    let lo = 1.0 / (sum_sq + half_width);
    Ok(RandomPathBound {
        bound,
        sum_sq,
        sum_sq_half_width: half_width,
        bound_interval: (lo, hi),
    })
}

fn u_statistic(counts: &HashMap<usize, u64>, n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    counts
        .values()
        .map(|&c| (c * (c.saturating_sub(1))) as f64)
        .sum::<f64>()
        / (n as f64 * (n as f64 - 1.0))
}

fn validate_path(
    wq: &WiredQuotient,
    in_source: &[bool],
    path: &Walk,
) -> Result<(), PotentialError> {
    let network = wq.network();
    if !in_source.get(path.start).copied().unwrap_or(false) {
        return Err(PotentialError::InvalidPath(format!(
            "path starts at {} outside the source set",
            path.start
        )));
    }
    if !path.is_consistent(network) {
        return Err(PotentialError::InvalidPath(
            "steps are not incident".into(),
        ));
    }
    if path.end() != wq.boundary() {
        return Err(PotentialError::InvalidPath(
            "path does not reach the boundary".into(),
        ));
    }
    let mut seen = vec![false; network.vertex_count()];
    for v in path.vertices() {
        if seen[v] {
            return Err(PotentialError::InvalidPath(format!(
                "path revisits vertex {v}"
            )));
        }
        seen[v] = true;
    }
    Ok(())
}
