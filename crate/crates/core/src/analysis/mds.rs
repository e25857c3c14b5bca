//! 2D embeddings of a distance matrix: shared output type and classical MDS.

use serde::{Deserialize, Serialize};

use super::distance::DistanceMatrix;

const POWER_MAX_ITER: usize = 200_000;
const POWER_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MappingMethod {
    Tsne,
    Mds,
}

impl MappingMethod {
    pub fn name(self) -> &'static str {
        match self {
            MappingMethod::Tsne => "tsne",
            MappingMethod::Mds => "mds",
        }
    }
}

impl std::str::FromStr for MappingMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tsne" => Ok(MappingMethod::Tsne),
            "mds" => Ok(MappingMethod::Mds),
            other => Err(format!("unknown mapping method '{other}' (expected tsne or mds)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding2D {
    pub method: MappingMethod,
    pub ids: Vec<String>,
    pub coords: Vec<[f64; 2]>,
    /// KL divergence per iteration (t-SNE); empty for MDS.
    #[serde(default)]
    pub objective_trace: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perplexity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Eigenvalues used for the two axes (MDS), after clamping.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<[f64; 2]>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Largest eigenpairs of a symmetric matrix by shifted power iteration with
/// deflation. The shift is a Gershgorin bound, so every shifted eigenvalue is
/// non-negative and the iteration finds the algebraically largest ones.
pub fn top_eigenpairs(m: &[Vec<f64>], count: usize) -> Vec<(f64, Vec<f64>)> {
    let n = m.len();
    let shift = m
        .iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut found: Vec<(f64, Vec<f64>)> = Vec::new();
    for _ in 0..count.min(n) {
        let orthogonalize = |v: &mut Vec<f64>, found: &[(f64, Vec<f64>)]| {
            for (_, u) in found {
                let c = dot(v, u);
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
            }
        };
        // deterministic start that is not orthogonal to typical eigenvectors
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 + 1.0).sqrt() / n as f64).collect();
        orthogonalize(&mut v, &found);
        if normalize(&mut v) == 0.0 {
            break;
        }
        for _ in 0..POWER_MAX_ITER {
            let mut next: Vec<f64> = (0..n).map(|i| dot(&m[i], &v) + shift * v[i]).collect();
            orthogonalize(&mut next, &found);
            if normalize(&mut next) == 0.0 {
                break;
            }
            let delta: f64 = next.iter().zip(&v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            v = next;
            if delta < POWER_TOL {
                break;
            }
        }
        // sign convention: largest-magnitude component positive (first on ties)
        let pivot = v
            .iter()
            .enumerate()
            .fold(
                (0, 0.0f64),
                |best, (i, &x)| if x.abs() > best.1.abs() + 1e-12 { (i, x) } else { best },
            )
            .0;
        if v[pivot] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        let mv: Vec<f64> = (0..n).map(|i| dot(&m[i], &v)).collect();
        found.push((dot(&v, &mv), v));
    }
    found
}

/// Torgerson double centering: B = −½ J D² J.
pub fn double_center(dist: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = dist.len();
    let sq: Vec<Vec<f64>> = dist.iter().map(|r| r.iter().map(|d| d * d).collect()).collect();
    let row_mean: Vec<f64> = sq.iter().map(|r| r.iter().sum::<f64>() / n as f64).collect();
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| -0.5 * (sq[i][j] - row_mean[i] - row_mean[j] + grand))
                .collect()
        })
        .collect()
}

pub fn classical_mds(dist: &DistanceMatrix) -> Embedding2D {
    let n = dist.len();
    let b = double_center(&dist.values);
    let pairs = top_eigenpairs(&b, 2);
    let mut coords = vec![[0.0; 2]; n];
    let mut eigenvalues = [0.0; 2];
    for (axis, (lambda, v)) in pairs.iter().enumerate() {
        let lambda = lambda.max(0.0);
        eigenvalues[axis] = lambda;
        let s = lambda.sqrt();
        for (c, x) in coords.iter_mut().zip(v) {
            c[axis] = x * s;
        }
    }
    center(&mut coords);
    Embedding2D {
        method: MappingMethod::Mds,
        ids: dist.ids.clone(),
        coords,
        objective_trace: Vec::new(),
        perplexity: None,
        seed: None,
        eigenvalues: Some(eigenvalues),
    }
}

pub(crate) fn center(coords: &mut [[f64; 2]]) {
    if coords.is_empty() {
        return;
    }
    let n = coords.len() as f64;
    for axis in 0..2 {
        let mean = coords.iter().map(|c| c[axis]).sum::<f64>() / n;
        coords.iter_mut().for_each(|c| c[axis] -= mean);
    }
}
