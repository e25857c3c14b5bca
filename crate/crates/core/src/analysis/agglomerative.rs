//! Bottom-up hierarchical clustering on a precomputed dissimilarity matrix.

use serde::{Deserialize, Serialize};

use super::cluster::{canonical_labels, count_clusters, ClusterParams, ClusterResult};
use super::distance::DistanceMatrix;
use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Linkage {
    Single,
    #[default]
    Average,
    Complete,
}

/// One dendrogram step. Ids below `n` are input points; the cluster created
/// by step `s` gets id `n + s`. `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
    pub size: usize,
}

/// Full merge sequence. Each active cluster is indexed by its smallest point,
/// and equal merge distances go to the lexicographically smallest pair.
pub fn linkage_tree(dist: &[Vec<f64>], linkage: Linkage) -> Vec<Merge> {
    let n = dist.len();
    let mut d: Vec<Vec<f64>> = dist.to_vec();
    let mut active: Vec<bool> = vec![true; n];
    let mut size: Vec<usize> = vec![1; n];
    let mut cluster_id: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    for step in 0..n.saturating_sub(1) {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in (i + 1)..n {
                if active[j] && best.is_none_or(|(_, _, h)| d[i][j] < h) {
                    best = Some((i, j, d[i][j]));
                }
            }
        }
        let (i, j, height) = best.expect("at least two active clusters");
        let (ni, nj) = (size[i] as f64, size[j] as f64);
        for k in 0..n {
            if !active[k] || k == i || k == j {
                continue;
            }
            let merged = match linkage {
                Linkage::Single => d[i][k].min(d[j][k]),
                Linkage::Complete => d[i][k].max(d[j][k]),
                Linkage::Average => (ni * d[i][k] + nj * d[j][k]) / (ni + nj),
            };
            d[i][k] = merged;
            d[k][i] = merged;
        }
        let (a, b) = (cluster_id[i].min(cluster_id[j]), cluster_id[i].max(cluster_id[j]));
        size[i] += size[j];
        active[j] = false;
        cluster_id[i] = n + step;
        merges.push(Merge {
            a,
            b,
            height,
            size: size[i],
        });
    }
    merges
}

/// Labels after applying the first `n - k` merges, numbered by first appearance.
pub fn cut_tree(merges: &[Merge], n: usize, k: usize) -> Vec<i64> {
    let mut parent: Vec<usize> = (0..(2 * n).max(1)).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (step, m) in merges.iter().take(n.saturating_sub(k)).enumerate() {
        let node = n + step;
        let ra = find(&mut parent, m.a);
        let rb = find(&mut parent, m.b);
        parent[ra] = node;
        parent[rb] = node;
    }
    let roots: Vec<i64> = (0..n).map(|i| find(&mut parent, i) as i64).collect();
    canonical_labels(&roots).0
}

pub fn agglomerative(dist: &DistanceMatrix, linkage: Linkage, k: usize) -> Result<ClusterResult, AnalysisError> {
    let n = dist.len();
    if k < 1 || k > n {
        return Err(AnalysisError::BadK { k, n });
    }
    let merges = linkage_tree(&dist.values, linkage);
    let labels = cut_tree(&merges, n, k);
    Ok(ClusterResult {
        params: ClusterParams::Hierarchical {
            linkage,
            k,
            metric: dist.metric,
        },
        n_clusters: count_clusters(&labels),
        labels,
        dendrogram: Some(merges),
        condensed_tree: None,
        inertia: None,
        inertia_trace: None,
        centroids: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::Metric;

    fn line(points: &[f64]) -> DistanceMatrix {
        let values = points
            .iter()
            .map(|a| points.iter().map(|b| (a - b).abs()).collect())
            .collect();
        DistanceMatrix::from_values(Metric::Jsd, (0..points.len()).map(|i| i.to_string()).collect(), values).unwrap()
    }

    #[test]
    fn separated_pairs() {
        let r = agglomerative(&line(&[0.0, 0.1, 10.0, 10.1]), Linkage::Single, 2).unwrap();
        assert_eq!(r.labels, vec![0, 0, 1, 1]);
        assert_eq!(r.n_clusters, 2);
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let r = agglomerative(&line(&[0.0, 1.0, 3.0]), Linkage::Complete, 3).unwrap();
        assert_eq!(r.labels, vec![0, 1, 2]);
    }

    #[test]
    fn bad_k() {
        assert!(matches!(
            agglomerative(&line(&[0.0, 1.0]), Linkage::Single, 3),
            Err(AnalysisError::BadK { k: 3, n: 2 })
        ));
        assert!(agglomerative(&line(&[0.0, 1.0]), Linkage::Single, 0).is_err());
    }

    #[test]
    fn ties_merge_smallest_pair_first() {
        let r = agglomerative(&line(&[0.0, 1.0, 2.0]), Linkage::Single, 3).unwrap();
        let m = r.dendrogram.unwrap();
        assert_eq!((m[0].a, m[0].b), (0, 1));
        assert_eq!((m[1].a, m[1].b, m[1].size), (2, 3, 3));
    }

    #[test]
    fn average_heights_non_decreasing() {
        let r = agglomerative(&line(&[0.0, 0.3, 1.1, 4.0, 4.2, 9.0, 9.9]), Linkage::Average, 1).unwrap();
        let heights: Vec<f64> = r.dendrogram.unwrap().iter().map(|m| m.height).collect();
        assert!(heights.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(r.labels, vec![0; 7]);
    }
}
