use serde::{Deserialize, Serialize};

use super::agglomerative::{Linkage, Merge};
use super::distance::Metric;
use super::hdbscan::CondensedEdge;
use super::kmeans::KMeansSpace;

pub const NOISE: i64 = -1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algo", rename_all = "lowercase")]
pub enum ClusterParams {
    Hierarchical {
        linkage: Linkage,
        k: usize,
        metric: Metric,
    },
    Kmeans {
        k: usize,
        seed: u64,
        restarts: usize,
        space: KMeansSpace,
    },
    Hdbscan {
        min_cluster_size: usize,
        min_samples: usize,
        metric: Metric,
    },
}

impl ClusterParams {
    pub fn algo_name(&self) -> &'static str {
        match self {
            ClusterParams::Hierarchical { .. } => "hierarchical",
            ClusterParams::Kmeans { .. } => "kmeans",
            ClusterParams::Hdbscan { .. } => "hdbscan",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    pub params: ClusterParams,
    /// One label per input row; `-1` marks noise (HDBSCAN only).
    pub labels: Vec<i64>,
    pub n_clusters: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dendrogram: Option<Vec<Merge>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condensed_tree: Option<Vec<CondensedEdge>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inertia: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inertia_trace: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centroids: Option<Vec<Vec<f64>>>,
}

/// Renumber labels 0.. in order of first appearance; noise stays noise.
/// Returns the new labels and the old→new map.
pub fn canonical_labels(labels: &[i64]) -> (Vec<i64>, Vec<(i64, i64)>) {
    let mut map: Vec<(i64, i64)> = Vec::new();
    let out = labels
        .iter()
        .map(|&l| {
            if l == NOISE {
                return NOISE;
            }
            if let Some(&(_, new)) = map.iter().find(|(old, _)| *old == l) {
                new
            } else {
                let new = map.len() as i64;
                map.push((l, new));
                new
            }
        })
        .collect();
    (out, map)
}

pub fn count_clusters(labels: &[i64]) -> usize {
    labels
        .iter()
        .filter(|&&l| l != NOISE)
        .max()
        .map_or(0, |&m| m as usize + 1)
}
