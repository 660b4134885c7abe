//! Exact silhouette score for one-dimensional data.
//!
//! In 1-D the summed distance from `x` to a sorted cluster splits at the
//! insertion point of `x`:
//!
//! ```text
//! Σ|x − y| = x·n_lo − S_lo + (S − S_lo) − x·(n − n_lo)
//! ```
//!
//! so with per-cluster prefix sums every `a_i`/`b_i` costs one binary search
//! per cluster, O(N·C·log N) overall instead of O(N²).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cluster labels, one per data point, each in `0..n_clusters`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub labels: Vec<usize>,
    pub n_clusters: usize,
}

impl Assignment {
    pub fn new(labels: Vec<usize>, n_clusters: usize) -> Self {
        Self { labels, n_clusters }
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters];
        for &l in &self.labels {
            if l < self.n_clusters {
                sizes[l] += 1;
            }
        }
        sizes
    }

    pub fn has_empty_cluster(&self) -> bool {
        self.cluster_sizes().contains(&0)
    }
}

struct SortedCluster {
    values: Vec<f64>,
    // prefix[k] = sum of the first k values
    prefix: Vec<f64>,
}

impl SortedCluster {
    fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        let mut prefix = Vec::with_capacity(values.len() + 1);
        let mut acc = 0.0;
        prefix.push(acc);
        for v in &values {
            acc += v;
            prefix.push(acc);
        }
        Self { values, prefix }
    }

    fn len(&self) -> usize {
        self.values.len()
    }

    fn distance_sum(&self, x: f64) -> f64 {
        let n = self.values.len();
        let lo = self.values.partition_point(|v| *v < x);
        let below = x * lo as f64 - self.prefix[lo];
        let above = (self.prefix[n] - self.prefix[lo]) - x * (n - lo) as f64;
        below + above
    }
}

/// Mean silhouette over all points. Singleton clusters contribute 0.
pub fn silhouette_score(values: &[f64], assignment: &Assignment) -> Result<f64> {
    let samples = silhouette_samples(values, assignment)?;
    Ok(samples.iter().sum::<f64>() / samples.len() as f64)
}

pub fn silhouette_samples(values: &[f64], assignment: &Assignment) -> Result<Vec<f64>> {
    validate(values, assignment)?;

    let center = values.iter().sum::<f64>() / values.len() as f64;
    let mut members = vec![Vec::new(); assignment.n_clusters];
    for (v, &l) in values.iter().zip(&assignment.labels) {
        members[l].push(v - center);
    }
    let clusters: Vec<SortedCluster> = members.into_iter().map(SortedCluster::new).collect();

    let samples = values
        .iter()
        .zip(&assignment.labels)
        .map(|(v, &own)| {
            let x = v - center;
            let own_size = clusters[own].len();
            if own_size == 1 {
                return 0.0;
            }
            let a = clusters[own].distance_sum(x) / (own_size - 1) as f64;
            let b = clusters
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != own)
                .map(|(_, c)| c.distance_sum(x) / c.len() as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom > 0.0 {
                (b - a) / denom
            } else {
                0.0
            }
        })
        .collect();
    Ok(samples)
}

fn validate(values: &[f64], assignment: &Assignment) -> Result<()> {
    if values.len() != assignment.labels.len() {
        return Err(Error::InvalidClustering(format!(
            "{} values but {} labels",
            values.len(),
            assignment.labels.len()
        )));
    }
    if let Some(l) = assignment
        .labels
        .iter()
        .find(|l| **l >= assignment.n_clusters)
    {
        return Err(Error::InvalidClustering(format!(
            "label {l} out of range for {} clusters",
            assignment.n_clusters
        )));
    }
    if assignment.n_clusters < 2 {
        return Err(Error::InvalidClustering(format!(
            "need at least 2 clusters, got {}",
            assignment.n_clusters
        )));
    }
    if assignment.has_empty_cluster() {
        return Err(Error::InvalidClustering("empty cluster".into()));
    }
    Ok(())
}
