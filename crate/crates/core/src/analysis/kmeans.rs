//! Lloyd's k-means with k-means++ seeding and restarts.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cluster::{count_clusters, ClusterParams, ClusterResult};
use super::AnalysisError;
use crate::rng::{seeded, HadesRng};

const MAX_ITER: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KMeansSpace {
    #[default]
    Euclidean,
    /// Points are mapped to √θ first, so Euclidean distance is √2 × Hellinger.
    Hellinger,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    /// Inertia after every assignment step of the returned run.
    pub trace: Vec<f64>,
}

pub fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid; ties go to the lower index.
pub fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = squared_euclidean(point, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_init(points: &[Vec<f64>], k: usize, rng: &mut HadesRng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = points
        .iter()
        .map(|p| squared_euclidean(p, &points[chosen[0]]))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && u < acc {
                    pick = Some(i);
                    break;
                }
            }
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).expect("total > 0"))
        } else {
            // every point coincides with a centre: take unused indices in order
            (0..n).find(|i| !chosen.contains(i)).expect("k <= n")
        };
        chosen.push(next);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(squared_euclidean(p, &points[next]));
        }
    }
    chosen.iter().map(|&i| points[i].clone()).collect()
}

fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>) -> KMeansFit {
    let dim = points[0].len();
    let mut labels: Vec<usize> = Vec::new();
    let mut trace = Vec::new();
    for _ in 0..MAX_ITER {
        let assigned: Vec<(usize, f64)> = points.iter().map(|p| nearest(p, &centroids)).collect();
        let new_labels: Vec<usize> = assigned.iter().map(|a| a.0).collect();
        trace.push(assigned.iter().map(|a| a.1).sum());
        if new_labels == labels {
            break;
        }
        labels = new_labels;
        let mut sums = vec![vec![0.0; dim]; centroids.len()];
        let mut counts = vec![0usize; centroids.len()];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, x) in sums[l].iter_mut().zip(p) {
                *s += x;
            }
        }
        for (c, (sum, count)) in centroids.iter_mut().zip(sums.into_iter().zip(counts)) {
            // empty clusters keep their centre
            if count > 0 {
                *c = sum.into_iter().map(|s| s / count as f64).collect();
            }
        }
    }
    KMeansFit {
        labels,
        centroids,
        inertia: *trace.last().expect("at least one assignment step"),
        trace,
    }
}

/// Best of `restarts` seeded runs by final inertia (earliest run wins ties).
pub fn kmeans_points(points: &[Vec<f64>], k: usize, seed: u64, restarts: usize) -> Result<KMeansFit, AnalysisError> {
    let n = points.len();
    if k < 1 || k > n {
        return Err(AnalysisError::BadK { k, n });
    }
    let dim = points[0].len();
    if let Some(i) = points.iter().position(|p| p.len() != dim) {
        return Err(AnalysisError::AtRow {
            row: i,
            source: Box::new(AnalysisError::DimensionMismatch {
                left: dim,
                right: points[i].len(),
            }),
        });
    }
    let mut rng = seeded(seed);
    let mut best: Option<KMeansFit> = None;
    for _ in 0..restarts.max(1) {
        let fit = lloyd(points, plus_plus_init(points, k, &mut rng));
        if best.as_ref().is_none_or(|b| fit.inertia < b.inertia) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}

pub fn kmeans(
    thetas: &[Vec<f64>],
    k: usize,
    seed: u64,
    restarts: usize,
    space: KMeansSpace,
) -> Result<ClusterResult, AnalysisError> {
    let points: Vec<Vec<f64>> = match space {
        KMeansSpace::Euclidean => thetas.to_vec(),
        KMeansSpace::Hellinger => thetas
            .iter()
            .map(|r| r.iter().map(|x| x.max(0.0).sqrt()).collect())
            .collect(),
    };
    let fit = kmeans_points(&points, k, seed, restarts)?;

    // number clusters by first appearance, dropping centres that ended empty
    let mut order: Vec<usize> = Vec::new();
    for &l in &fit.labels {
        if !order.contains(&l) {
            order.push(l);
        }
    }
    let labels: Vec<i64> = fit
        .labels
        .iter()
        .map(|l| order.iter().position(|o| o == l).expect("label seen") as i64)
        .collect();
    let centroids = order.iter().map(|&c| fit.centroids[c].clone()).collect();
    Ok(ClusterResult {
        params: ClusterParams::Kmeans {
            k,
            seed,
            restarts,
            space,
        },
        n_clusters: count_clusters(&labels),
        labels,
        dendrogram: None,
        condensed_tree: None,
        inertia: Some(fit.inertia),
        inertia_trace: Some(fit.trace),
        centroids: Some(centroids),
    })
}
