//! Non-negative matrix factorization with Lee–Seung multiplicative updates
//! on the Frobenius objective.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::model::{normalize, Method, TopicModel, MODEL_VERSION};
use super::TopicError;
use crate::corpus::BowMatrix;
use crate::rng::seeded;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weighting {
    Tfidf,
    Counts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmfParams {
    pub k: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
    pub weighting: Weighting,
}

impl NmfParams {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            max_iter: 1000,
            tol: 1e-6,
            seed,
            weighting: Weighting::Tfidf,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmfFactors {
    /// rows × K
    pub w: Vec<Vec<f64>>,
    /// K × columns
    pub h: Vec<Vec<f64>>,
    /// Frobenius error ‖V − WH‖ before the first update and after each update.
    pub errors: Vec<f64>,
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            let mut out = vec![0.0; cols];
            for (x, brow) in row.iter().zip(b) {
                if *x != 0.0 {
                    for (o, y) in out.iter_mut().zip(brow) {
                        *o += x * y;
                    }
                }
            }
            out
        })
        .collect()
}

fn transpose(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

pub fn frobenius_error(v: &[Vec<f64>], w: &[Vec<f64>], h: &[Vec<f64>]) -> f64 {
    let wh = matmul(w, h);
    v.iter()
        .zip(&wh)
        .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)))
        .sum::<f64>()
        .sqrt()
}

/// `x ← x ⊙ num / den`, leaving entries with a zero denominator untouched.
fn multiplicative_step(x: &mut [Vec<f64>], num: &[Vec<f64>], den: &[Vec<f64>]) {
    for ((xr, nr), dr) in x.iter_mut().zip(num).zip(den) {
        for ((xv, n), d) in xr.iter_mut().zip(nr).zip(dr) {
            if *d > 0.0 {
                *xv *= n / d;
            }
        }
    }
}

pub fn nmf_factorize(v: &[Vec<f64>], k: usize, max_iter: usize, tol: f64, seed: u64) -> Result<NmfFactors, TopicError> {
    let rows = v.len();
    let cols = v.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(TopicError::EmptyCorpus);
    }
    if k == 0 {
        return Err(TopicError::DegenerateK { k, tokens: cols });
    }
    if !(tol > 0.0) {
        return Err(TopicError::InvalidConfig("tol must be positive".into()));
    }
    for (i, row) in v.iter().enumerate() {
        if row.len() != cols {
            return Err(TopicError::InvalidConfig(format!("row {i} has a different width")));
        }
        if let Some(j) = row.iter().position(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(TopicError::NegativeInput { row: i, col: j });
        }
        if row.iter().all(|&x| x == 0.0) {
            return Err(TopicError::AllZeroRow(i));
        }
    }

    let mean = v.iter().flatten().sum::<f64>() / (rows * cols) as f64;
    let scale = (mean / k as f64).sqrt();
    let mut rng = seeded(seed);
    // (0, 1] so no factor starts at an absorbing zero
    let mut draw = |n: usize, m: usize| -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| (0..m).map(|_| scale * (1.0 - rng.random::<f64>())).collect())
            .collect()
    };
    let mut w = draw(rows, k);
    let mut h = draw(k, cols);

    let mut errors = vec![frobenius_error(v, &w, &h)];
    for _ in 0..max_iter {
        let wt = transpose(&w);
        let num_h = matmul(&wt, v);
        let den_h = matmul(&matmul(&wt, &w), &h);
        multiplicative_step(&mut h, &num_h, &den_h);

        let ht = transpose(&h);
        let num_w = matmul(v, &ht);
        let den_w = matmul(&w, &matmul(&h, &ht));
        multiplicative_step(&mut w, &num_w, &den_w);

        let err = frobenius_error(v, &w, &h);
        let prev = *errors.last().expect("seeded with the initial error");
        errors.push(err);
        if err == 0.0 || (prev - err).abs() / prev < tol {
            break;
        }
    }
    Ok(NmfFactors { w, h, errors })
}

impl NmfFactors {
    /// φ = normalized rows of H; θ_d ∝ W_d ⊙ (row sums of H).
    pub fn distributions(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mass: Vec<f64> = self.h.iter().map(|r| r.iter().sum()).collect();
        let phi = self.h.iter().map(|r| normalize(r)).collect();
        let theta = self
            .w
            .iter()
            .map(|r| {
                let weighted: Vec<f64> = r.iter().zip(&mass).map(|(a, b)| a * b).collect();
                normalize(&weighted)
            })
            .collect();
        (phi, theta)
    }
}

pub fn nmf_fit(bow: &BowMatrix, params: &NmfParams) -> Result<TopicModel, TopicError> {
    let matrix = match params.weighting {
        Weighting::Tfidf => bow.tfidf(),
        Weighting::Counts => bow.dense(),
    };
    let factors = nmf_factorize(&matrix, params.k, params.max_iter, params.tol, params.seed).map_err(|e| match e {
        TopicError::AllZeroRow(i) => TopicError::EmptyDocument(bow.doc_ids[i].clone()),
        other => other,
    })?;
    let (phi, theta) = factors.distributions();
    Ok(TopicModel {
        version: MODEL_VERSION,
        method: Method::Nmf,
        k: params.k,
        alpha: None,
        beta: None,
        seed: params.seed,
        coherence: 0.0,
        labels: TopicModel::default_labels(params.k),
        phi,
        theta,
        vocab: bow.vocab.tokens().to_vec(),
        doc_ids: bow.doc_ids.clone(),
        doc_lengths: bow.doc_lengths(),
        trace: factors.errors,
    })
}
