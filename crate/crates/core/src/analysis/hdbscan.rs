//! HDBSCAN on a precomputed dissimilarity matrix: mutual-reachability MST,
//! single-linkage hierarchy, condensed tree and excess-of-mass selection.
//!
//! The root of the condensed tree is never selected, so input with no
//! internal density structure (e.g. all points equidistant with
//! `min_cluster_size = n`) comes out as all noise.

use serde::{Deserialize, Serialize};

use super::cluster::{canonical_labels, count_clusters, ClusterParams, ClusterResult, NOISE};
use super::distance::DistanceMatrix;
use super::AnalysisError;

/// Cap on λ = 1/distance for zero distances.
const MAX_LAMBDA: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MstEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Edge of the condensed tree. Ids below `n` are points; cluster ids start at `n`
/// (the root is `n`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CondensedEdge {
    pub parent: usize,
    pub child: usize,
    pub lambda: f64,
    pub size: usize,
}

/// Distance from each point to its `min_samples`-th nearest other point
/// (clamped to the farthest when fewer exist).
pub fn core_distances(dist: &[Vec<f64>], min_samples: usize) -> Vec<f64> {
    let n = dist.len();
    (0..n)
        .map(|i| {
            let mut others: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| dist[i][j]).collect();
            if others.is_empty() {
                return 0.0;
            }
            others.sort_by(f64::total_cmp);
            others[(min_samples.max(1) - 1).min(others.len() - 1)]
        })
        .collect()
}

pub fn mutual_reachability(dist: &[Vec<f64>], min_samples: usize) -> Vec<Vec<f64>> {
    let core = core_distances(dist, min_samples);
    let n = dist.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        dist[i][j].max(core[i]).max(core[j])
                    }
                })
                .collect()
        })
        .collect()
}

/// Prim's algorithm from vertex 0; the next vertex is the lowest-index one
/// among those with minimal connection weight. Edges in insertion order.
pub fn prim_mst(weights: &[Vec<f64>]) -> Vec<MstEdge> {
    let n = weights.len();
    if n == 0 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![0usize; n];
    in_tree[0] = true;
    for j in 1..n {
        best[j] = weights[0][j];
    }
    let mut edges = Vec::with_capacity(n - 1);
    for _ in 1..n {
        let mut next: Option<usize> = None;
        for j in 0..n {
            if !in_tree[j] && next.is_none_or(|v| best[j] < best[v]) {
                next = Some(j);
            }
        }
        let v = next.expect("a vertex remains");
        in_tree[v] = true;
        edges.push(MstEdge {
            a: from[v].min(v),
            b: from[v].max(v),
            weight: best[v],
        });
        for j in 0..n {
            if !in_tree[j] && weights[v][j] < best[j] {
                best[j] = weights[v][j];
                from[j] = v;
            }
        }
    }
    edges
}

pub fn mutual_reachability_mst(dist: &[Vec<f64>], min_samples: usize) -> Vec<MstEdge> {
    prim_mst(&mutual_reachability(dist, min_samples))
}

struct LinkageNode {
    left: usize,
    right: usize,
    distance: f64,
    size: usize,
}

/// Single-linkage hierarchy from MST edges (stable-sorted by weight).
/// Node `n + i` is the i-th merge.
fn single_linkage(n: usize, mst: &[MstEdge]) -> Vec<LinkageNode> {
    let mut edges = mst.to_vec();
    edges.sort_by(|x, y| x.weight.total_cmp(&y.weight));
    let mut parent: Vec<usize> = (0..2 * n).collect();
    let mut size: Vec<usize> = vec![1; 2 * n];
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut nodes = Vec::with_capacity(n.saturating_sub(1));
    for (i, e) in edges.iter().enumerate() {
        let ra = find(&mut parent, e.a);
        let rb = find(&mut parent, e.b);
        let node = n + i;
        parent[ra] = node;
        parent[rb] = node;
        size[node] = size[ra] + size[rb];
        nodes.push(LinkageNode {
            left: ra,
            right: rb,
            distance: e.weight,
            size: size[node],
        });
    }
    nodes
}

fn lambda_of(distance: f64) -> f64 {
    if distance > 0.0 {
        (1.0 / distance).min(MAX_LAMBDA)
    } else {
        MAX_LAMBDA
    }
}

fn condense(n: usize, nodes: &[LinkageNode], min_cluster_size: usize) -> Vec<CondensedEdge> {
    let size_of = |x: usize| if x < n { 1 } else { nodes[x - n].size };
    let leaves = |root: usize| -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            if x < n {
                out.push(x);
            } else {
                stack.push(nodes[x - n].right);
                stack.push(nodes[x - n].left);
            }
        }
        out.sort_unstable();
        out
    };

    let mut edges = Vec::new();
    if nodes.is_empty() {
        return edges;
    }
    let root = n + nodes.len() - 1;
    let mut next_label = n + 1;
    // (linkage node, condensed cluster label)
    let mut queue = std::collections::VecDeque::from([(root, n)]);
    while let Some((node, label)) = queue.pop_front() {
        if node < n {
            continue;
        }
        let LinkageNode {
            left, right, distance, ..
        } = nodes[node - n];
        let lambda = lambda_of(distance);
        let (ls, rs) = (size_of(left), size_of(right));
        match (ls >= min_cluster_size, rs >= min_cluster_size) {
            (true, true) => {
                for (child, sz) in [(left, ls), (right, rs)] {
                    edges.push(CondensedEdge {
                        parent: label,
                        child: next_label,
                        lambda,
                        size: sz,
                    });
                    queue.push_back((child, next_label));
                    next_label += 1;
                }
            }
            (false, false) => {
                for child in [left, right] {
                    for p in leaves(child) {
                        edges.push(CondensedEdge {
                            parent: label,
                            child: p,
                            lambda,
                            size: 1,
                        });
                    }
                }
            }
            (true, false) => {
                for p in leaves(right) {
                    edges.push(CondensedEdge {
                        parent: label,
                        child: p,
                        lambda,
                        size: 1,
                    });
                }
                queue.push_back((left, label));
            }
            (false, true) => {
                for p in leaves(left) {
                    edges.push(CondensedEdge {
                        parent: label,
                        child: p,
                        lambda,
                        size: 1,
                    });
                }
                queue.push_back((right, label));
            }
        }
    }
    edges
}

/// Excess-of-mass selection over the condensed tree, root excluded.
/// Returns the selected cluster ids.
fn select_clusters(n: usize, tree: &[CondensedEdge]) -> Vec<usize> {
    let max_label = tree.iter().map(|e| e.parent.max(e.child)).max().unwrap_or(n);
    if max_label <= n {
        return Vec::new();
    }
    let n_clusters = max_label - n + 1;
    let mut birth = vec![0.0; n_clusters];
    for e in tree.iter().filter(|e| e.child >= n) {
        birth[e.child - n] = e.lambda;
    }
    let mut stability = vec![0.0; n_clusters];
    for e in tree {
        stability[e.parent - n] += (e.lambda - birth[e.parent - n]) * e.size as f64;
    }
    let children: Vec<Vec<usize>> = (0..n_clusters)
        .map(|c| {
            tree.iter()
                .filter(|e| e.parent == n + c && e.child >= n)
                .map(|e| e.child)
                .collect()
        })
        .collect();

    let mut selected = vec![true; n_clusters];
    selected[0] = false;
    // children always carry larger ids than their parent
    for c in (1..n_clusters).rev() {
        let child_total: f64 = children[c].iter().map(|&ch| stability[ch - n]).sum();
        if !children[c].is_empty() && child_total > stability[c] {
            selected[c] = false;
            stability[c] = child_total;
        } else {
            let mut stack = children[c].clone();
            while let Some(d) = stack.pop() {
                selected[d - n] = false;
                stack.extend(children[d - n].iter().copied());
            }
        }
    }
    (1..n_clusters).filter(|&c| selected[c]).map(|c| c + n).collect()
}

pub fn hdbscan(
    dist: &DistanceMatrix,
    min_cluster_size: usize,
    min_samples: usize,
) -> Result<ClusterResult, AnalysisError> {
    let n = dist.len();
    if min_cluster_size < 2 || min_samples < 1 {
        return Err(AnalysisError::InvalidInput(
            "min_cluster_size must be >= 2 and min_samples >= 1".into(),
        ));
    }
    if n < min_cluster_size {
        return Err(AnalysisError::TooFewPoints { n, min_cluster_size });
    }
    let mst = mutual_reachability_mst(&dist.values, min_samples);
    let nodes = single_linkage(n, &mst);
    let tree = condense(n, &nodes, min_cluster_size);
    let selected = select_clusters(n, &tree);

    let mut raw = vec![NOISE; n];
    for (label, &cluster) in selected.iter().enumerate() {
        let mut stack = vec![cluster];
        while let Some(c) = stack.pop() {
            for e in tree.iter().filter(|e| e.parent == c) {
                if e.child < n {
                    raw[e.child] = label as i64;
                } else {
                    stack.push(e.child);
                }
            }
        }
    }
    let labels = canonical_labels(&raw).0;
    Ok(ClusterResult {
        params: ClusterParams::Hdbscan {
            min_cluster_size,
            min_samples,
            metric: dist.metric,
        },
        n_clusters: count_clusters(&labels),
        labels,
        dendrogram: None,
        condensed_tree: Some(tree),
        inertia: None,
        inertia_trace: None,
        centroids: None,
    })
}
