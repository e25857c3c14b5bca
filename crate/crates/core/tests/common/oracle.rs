//! Independent re-implementations used as test oracles. They favour the most
//! literal form of each definition over speed.

use hades::analysis::Linkage;

/// Agglomeration by recomputing every cluster-pair linkage from the original
/// distances at each step (O(n³) per step). Clusters are identified by their
/// smallest member; equal distances go to the lexicographically smallest pair.
/// Returns labels numbered by first appearance after cutting at `k` clusters.
pub fn naive_agglomerative(dist: &[Vec<f64>], linkage: Linkage, k: usize) -> Vec<i64> {
    let n = dist.len();
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let link = |a: &[usize], b: &[usize]| -> f64 {
        let ds = a.iter().flat_map(|&i| b.iter().map(move |&j| dist[i][j]));
        match linkage {
            Linkage::Single => ds.fold(f64::INFINITY, f64::min),
            Linkage::Complete => ds.fold(f64::NEG_INFINITY, f64::max),
            Linkage::Average => ds.sum::<f64>() / (a.len() * b.len()) as f64,
        }
    };
    while clusters.len() > k {
        clusters.sort_by_key(|c| *c.iter().min().unwrap());
        let mut best = (0, 1, f64::INFINITY);
        for i in 0..clusters.len() {
            for j in (i + 1)..clusters.len() {
                let d = link(&clusters[i], &clusters[j]);
                if d < best.2 {
                    best = (i, j, d);
                }
            }
        }
        let merged = clusters.remove(best.1);
        clusters[best.0].extend(merged);
    }
    let mut raw = vec![0i64; n];
    for (c, members) in clusters.iter().enumerate() {
        for &m in members {
            raw[m] = c as i64;
        }
    }
    renumber(&raw)
}

pub fn renumber(labels: &[i64]) -> Vec<i64> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            if l < 0 {
                return l;
            }
            let next = map.len() as i64;
            *map.entry(l).or_insert(next)
        })
        .collect()
}

/// Mutual-reachability weights: core distance is the distance to the
/// `min_samples`-th nearest other point.
pub fn mutual_reachability(dist: &[Vec<f64>], min_samples: usize) -> Vec<Vec<f64>> {
    let n = dist.len();
    let core: Vec<f64> = (0..n)
        .map(|i| {
            let mut d: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| dist[i][j]).collect();
            d.sort_by(f64::total_cmp);
            d[(min_samples - 1).min(d.len() - 1)]
        })
        .collect();
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

/// Minimum total weight over every spanning tree of the complete graph, by
/// enumerating all (n−1)-edge subsets.
pub fn exhaustive_mst_weight(w: &[Vec<f64>]) -> f64 {
    let n = w.len();
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let mut best = f64::INFINITY;
    let mut chosen = Vec::with_capacity(n - 1);
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    fn recurse(
        start: usize,
        edges: &[(usize, usize)],
        chosen: &mut Vec<usize>,
        n: usize,
        w: &[Vec<f64>],
        best: &mut f64,
    ) {
        if chosen.len() == n - 1 {
            let mut parent: Vec<usize> = (0..n).collect();
            for &e in chosen.iter() {
                let (a, b) = edges[e];
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra == rb {
                    return;
                }
                parent[ra] = rb;
            }
            let total: f64 = chosen.iter().map(|&e| w[edges[e].0][edges[e].1]).sum();
            if total < *best {
                *best = total;
            }
            return;
        }
        for e in start..edges.len() {
            chosen.push(e);
            recurse(e + 1, edges, chosen, n, w, best);
            chosen.pop();
        }
    }
    recurse(0, &edges, &mut chosen, n, w, &mut best);
    best
}

/// Wilks' Λ and the exact two-group F test, computed from first principles:
/// drop the last coordinate, build B and W by explicit sums, take determinants
/// by elimination. With two groups F = ((1 − Λ)/Λ)·(N − p − 1)/p on (p, N − p − 1).
pub struct TwoGroupManova {
    pub lambda: f64,
    pub f: f64,
    pub df1: f64,
    pub df2: f64,
}

pub fn two_group_manova(rows: &[Vec<f64>], labels: &[i64]) -> TwoGroupManova {
    let p = rows[0].len() - 1;
    let n = rows.len();
    let x: Vec<&[f64]> = rows.iter().map(|r| &r[..p]).collect();
    let mean = |idx: &[usize]| -> Vec<f64> {
        (0..p)
            .map(|c| idx.iter().map(|&i| x[i][c]).sum::<f64>() / idx.len() as f64)
            .collect()
    };
    let all: Vec<usize> = (0..n).collect();
    let grand = mean(&all);
    let mut b = vec![vec![0.0; p]; p];
    let mut w = vec![vec![0.0; p]; p];
    for g in [0i64, 1] {
        let idx: Vec<usize> = (0..n).filter(|&i| labels[i] == g).collect();
        let m = mean(&idx);
        for r in 0..p {
            for c in 0..p {
                b[r][c] += idx.len() as f64 * (m[r] - grand[r]) * (m[c] - grand[c]);
                for &i in &idx {
                    w[r][c] += (x[i][r] - m[r]) * (x[i][c] - m[c]);
                }
            }
        }
    }
    let t: Vec<Vec<f64>> = (0..p).map(|r| (0..p).map(|c| b[r][c] + w[r][c]).collect()).collect();
    let lambda = super::determinant(&w) / super::determinant(&t);
    let (df1, df2) = (p as f64, (n - p - 1) as f64);
    TwoGroupManova {
        lambda,
        f: (1.0 - lambda) / lambda * df2 / df1,
        df1,
        df2,
    }
}

/// Relevance and saliency straight from their definitions with p(t) given.
pub fn relevance(phi: &[Vec<f64>], p_topic: &[f64], lambda: f64, topic: usize, word: usize) -> f64 {
    let pw: f64 = (0..phi.len()).map(|t| phi[t][word] * p_topic[t]).sum();
    lambda * phi[topic][word].ln() + (1.0 - lambda) * (phi[topic][word] / pw).ln()
}

pub fn saliency(phi: &[Vec<f64>], p_topic: &[f64], word: usize) -> f64 {
    let pw: f64 = (0..phi.len()).map(|t| phi[t][word] * p_topic[t]).sum();
    let distinct: f64 = (0..phi.len())
        .map(|t| {
            let post = phi[t][word] * p_topic[t] / pw;
            if post > 0.0 {
                post * (post / p_topic[t]).ln()
            } else {
                0.0
            }
        })
        .sum();
    pw * distinct
}

/// Central finite-difference gradient of `f` at `y`.
pub fn finite_difference(f: impl Fn(&[[f64; 2]]) -> f64, y: &[[f64; 2]], h: f64) -> Vec<[f64; 2]> {
    let mut out = vec![[0.0; 2]; y.len()];
    for i in 0..y.len() {
        for d in 0..2 {
            let mut plus = y.to_vec();
            let mut minus = y.to_vec();
            plus[i][d] += h;
            minus[i][d] -= h;
            out[i][d] = (f(&plus) - f(&minus)) / (2.0 * h);
        }
    }
    out
}

/// KL(P‖Q) with the Student-t kernel, written out directly.
pub fn tsne_kl(p: &[Vec<f64>], y: &[[f64; 2]]) -> f64 {
    let n = y.len();
    let kernel = |i: usize, j: usize| 1.0 / (1.0 + (y[i][0] - y[j][0]).powi(2) + (y[i][1] - y[j][1]).powi(2));
    let z: f64 = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| kernel(i, j))
        .sum();
    let mut kl = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j && p[i][j] > 0.0 {
                kl += p[i][j] * (p[i][j] / (kernel(i, j) / z)).ln();
            }
        }
    }
    kl
}

/// Pearson r by the textbook two-pass formula.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

/// Spearman ρ for tie-free data: 1 − 6Σd²/(n(n²−1)).
pub fn spearman_no_ties(x: &[f64], y: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        for (pos, &i) in idx.iter().enumerate() {
            r[i] = pos as f64 + 1.0;
        }
        r
    };
    let (rx, ry) = (rank(x), rank(y));
    let n = x.len() as f64;
    let d2: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - b).powi(2)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}
