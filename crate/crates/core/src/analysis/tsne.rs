//! Exact t-SNE on a precomputed distance matrix.

use rand_distr::{Distribution, Normal};

use super::distance::DistanceMatrix;
use super::mds::{center, Embedding2D, MappingMethod};
use super::AnalysisError;
use crate::rng::seeded;

pub const EXAGGERATION: f64 = 12.0;
pub const EXAGGERATION_ITERS: usize = 250;
pub const LEARNING_RATE: f64 = 200.0;
pub const MOMENTUM_EARLY: f64 = 0.5;
pub const MOMENTUM_LATE: f64 = 0.8;
pub const DEFAULT_ITERS: usize = 1000;
const PERPLEXITY_TOL: f64 = 1e-4;
const PERPLEXITY_STEPS: usize = 50;
const MIN_GAIN: f64 = 0.01;
const P_FLOOR: f64 = 1e-12;
const INIT_STD: f64 = 1e-4;
/// Steps follow the reference exact implementation, which applies the
/// learning rate to the gradient without its constant factor 4.
const STEP_SCALE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TsneParams {
    pub perplexity: f64,
    pub seed: u64,
    pub iterations: usize,
}

impl TsneParams {
    pub fn new(n: usize, seed: u64) -> Self {
        TsneParams {
            perplexity: default_perplexity(n),
            seed,
            iterations: DEFAULT_ITERS,
        }
    }
}

/// min(30, (n − 1)/3).
pub fn default_perplexity(n: usize) -> f64 {
    (n.saturating_sub(1) as f64 / 3.0).min(30.0)
}

/// Conditional p(j|i) for one row of distances with precision β; returns the
/// row and its Shannon entropy (nats).
fn conditional_row(d2: &[f64], i: usize, beta: f64) -> (Vec<f64>, f64) {
    let min = d2
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &x)| x)
        .fold(f64::INFINITY, f64::min);
    // shifting by the nearest distance keeps exp() away from underflow
    let mut row: Vec<f64> = d2
        .iter()
        .enumerate()
        .map(|(j, &x)| if j == i { 0.0 } else { (-beta * (x - min)).exp() })
        .collect();
    let sum: f64 = row.iter().sum();
    row.iter_mut().for_each(|p| *p /= sum);
    let h = -row.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>();
    (row, h)
}

/// Per-point binary search on β so the conditional entropy matches ln(perplexity).
pub fn conditional_probabilities(dist: &[Vec<f64>], perplexity: f64) -> Vec<Vec<f64>> {
    let target = perplexity.ln();
    dist.iter()
        .enumerate()
        .map(|(i, row)| {
            let d2: Vec<f64> = row.iter().map(|d| d * d).collect();
            let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
            let mut beta = 1.0;
            let (mut best, mut h) = conditional_row(&d2, i, beta);
            for _ in 0..PERPLEXITY_STEPS {
                if (h - target).abs() < PERPLEXITY_TOL {
                    break;
                }
                if h > target {
                    lo = beta;
                    beta = if hi.is_finite() { (beta + hi) / 2.0 } else { beta * 2.0 };
                } else {
                    hi = beta;
                    beta = (beta + lo) / 2.0;
                }
                (best, h) = conditional_row(&d2, i, beta);
            }
            best
        })
        .collect()
}

/// Symmetric joint P = (P_{j|i} + P_{i|j}) / 2n, floored at 1e-12 off the diagonal.
pub fn joint_probabilities(dist: &[Vec<f64>], perplexity: f64) -> Vec<Vec<f64>> {
    let cond = conditional_probabilities(dist, perplexity);
    let n = dist.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        0.0
                    } else {
                        ((cond[i][j] + cond[j][i]) / (2.0 * n as f64)).max(P_FLOOR)
                    }
                })
                .collect()
        })
        .collect()
}

/// KL(P‖Q) and its gradient with respect to every coordinate of `y`.
pub fn kl_and_gradient(p: &[Vec<f64>], y: &[[f64; 2]]) -> (f64, Vec<[f64; 2]>) {
    let n = y.len();
    let mut num = vec![vec![0.0; n]; n];
    let mut z = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let dx = y[i][0] - y[j][0];
            let dy = y[i][1] - y[j][1];
            let v = 1.0 / (1.0 + dx * dx + dy * dy);
            num[i][j] = v;
            num[j][i] = v;
            z += 2.0 * v;
        }
    }
    let mut kl = 0.0;
    let mut grad = vec![[0.0; 2]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let q = num[i][j] / z;
            let pij = p[i][j];
            if pij > 0.0 {
                kl += pij * (pij / q).ln();
            }
            let mult = 4.0 * (pij - q) * num[i][j];
            grad[i][0] += mult * (y[i][0] - y[j][0]);
            grad[i][1] += mult * (y[i][1] - y[j][1]);
        }
    }
    (kl, grad)
}

pub fn tsne(dist: &DistanceMatrix, params: &TsneParams) -> Result<Embedding2D, AnalysisError> {
    let n = dist.len();
    if !(params.perplexity > 0.0) || params.perplexity >= n as f64 - 1.0 {
        return Err(AnalysisError::PerplexityTooLarge {
            perplexity: params.perplexity,
            n,
        });
    }
    let p = joint_probabilities(&dist.values, params.perplexity);
    let exaggerated: Vec<Vec<f64>> = p.iter().map(|r| r.iter().map(|x| x * EXAGGERATION).collect()).collect();

    let mut rng = seeded(params.seed);
    let normal = Normal::new(0.0, INIT_STD).expect("valid normal");
    let mut y: Vec<[f64; 2]> = (0..n)
        .map(|_| [normal.sample(&mut rng), normal.sample(&mut rng)])
        .collect();
    let mut velocity = vec![[0.0; 2]; n];
    let mut gains = vec![[1.0f64; 2]; n];
    let mut trace = Vec::with_capacity(params.iterations);

    for iter in 0..params.iterations {
        let early = iter < EXAGGERATION_ITERS;
        let target = if early { &exaggerated } else { &p };
        let (_, grad) = kl_and_gradient(target, &y);
        let momentum = if early { MOMENTUM_EARLY } else { MOMENTUM_LATE };
        for i in 0..n {
            for d in 0..2 {
                let g = STEP_SCALE * grad[i][d];
                let v = velocity[i][d];
                gains[i][d] = if (g > 0.0) != (v > 0.0) {
                    gains[i][d] + 0.2
                } else {
                    (gains[i][d] * 0.8).max(MIN_GAIN)
                };
                velocity[i][d] = momentum * v - LEARNING_RATE * gains[i][d] * g;
                y[i][d] += velocity[i][d];
            }
        }
        center(&mut y);
        trace.push(kl_and_gradient(&p, &y).0);
    }

    Ok(Embedding2D {
        method: MappingMethod::Tsne,
        ids: dist.ids.clone(),
        coords: y,
        objective_trace: trace,
        perplexity: Some(params.perplexity),
        seed: Some(params.seed),
        eigenvalues: None,
    })
}
