//! Latent Dirichlet allocation by collapsed Gibbs sampling.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::model::{Method, TopicModel, MODEL_VERSION};
use super::TopicError;
use crate::corpus::BowMatrix;
use crate::rng::seeded;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
}

impl LdaParams {
    /// Griffiths–Steyvers priors: α = 50/K, β = 0.01; 1000 sweeps, 100 burn-in.
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            alpha: 50.0 / k as f64,
            beta: 0.01,
            iterations: 1000,
            burn_in: 100,
            seed,
        }
    }
}

struct GibbsState {
    k: usize,
    v: usize,
    alpha: f64,
    beta: f64,
    docs: Vec<Vec<usize>>,
    z: Vec<Vec<usize>>,
    n_dk: Vec<Vec<u32>>,
    n_kv: Vec<Vec<u32>>,
    n_k: Vec<u32>,
}

impl GibbsState {
    fn init(docs: Vec<Vec<usize>>, k: usize, v: usize, alpha: f64, beta: f64, rng: &mut impl Rng) -> Self {
        let mut n_dk = vec![vec![0u32; k]; docs.len()];
        let mut n_kv = vec![vec![0u32; v]; k];
        let mut n_k = vec![0u32; k];
        let z = docs
            .iter()
            .enumerate()
            .map(|(d, words)| {
                words
                    .iter()
                    .map(|&w| {
                        let t = rng.random_range(0..k);
                        n_dk[d][t] += 1;
                        n_kv[t][w] += 1;
                        n_k[t] += 1;
                        t
                    })
                    .collect()
            })
            .collect();
        Self {
            k,
            v,
            alpha,
            beta,
            docs,
            z,
            n_dk,
            n_kv,
            n_k,
        }
    }

    fn sweep(&mut self, rng: &mut impl Rng, weights: &mut [f64]) {
        let v_beta = self.v as f64 * self.beta;
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i];
                let old = self.z[d][i];
                self.n_dk[d][old] -= 1;
                self.n_kv[old][w] -= 1;
                self.n_k[old] -= 1;

                let mut total = 0.0;
                for t in 0..self.k {
                    total += (self.n_dk[d][t] as f64 + self.alpha) * (self.n_kv[t][w] as f64 + self.beta)
                        / (self.n_k[t] as f64 + v_beta);
                    weights[t] = total;
                }
                let u = rng.random::<f64>() * total;
                let new = weights.iter().position(|&c| u < c).unwrap_or(self.k - 1);

                self.z[d][i] = new;
                self.n_dk[d][new] += 1;
                self.n_kv[new][w] += 1;
                self.n_k[new] += 1;
            }
        }
    }

    /// log p(w | z) with φ integrated out.
    fn log_likelihood(&self) -> f64 {
        let v_beta = self.v as f64 * self.beta;
        let mut ll = self.k as f64 * (ln_gamma(v_beta) - self.v as f64 * ln_gamma(self.beta));
        for t in 0..self.k {
            let mut row = 0.0;
            for &c in &self.n_kv[t] {
                if c > 0 {
                    row += ln_gamma(c as f64 + self.beta);
                } else {
                    row += ln_gamma(self.beta);
                }
            }
            ll += row - ln_gamma(self.n_k[t] as f64 + v_beta);
        }
        ll
    }
}

pub fn lda_fit(bow: &BowMatrix, params: &LdaParams) -> Result<TopicModel, TopicError> {
    let docs = bow.token_streams();
    let total_tokens: usize = docs.iter().map(Vec::len).sum();
    if docs.is_empty() || total_tokens == 0 {
        return Err(TopicError::EmptyCorpus);
    }
    if let Some(d) = docs.iter().position(Vec::is_empty) {
        return Err(TopicError::EmptyDocument(bow.doc_ids[d].clone()));
    }
    if params.k == 0 || params.k > total_tokens {
        return Err(TopicError::DegenerateK {
            k: params.k,
            tokens: total_tokens,
        });
    }
    if !(params.alpha > 0.0 && params.beta > 0.0) {
        return Err(TopicError::InvalidConfig("alpha and beta must be positive".into()));
    }
    if params.iterations <= params.burn_in {
        return Err(TopicError::InvalidConfig("iterations must exceed burn_in".into()));
    }

    let v = bow.n_terms();
    let mut rng = seeded(params.seed);
    let mut state = GibbsState::init(docs, params.k, v, params.alpha, params.beta, &mut rng);
    let mut weights = vec![0.0; params.k];
    let mut trace = Vec::with_capacity(params.iterations);
    for _ in 0..params.iterations {
        state.sweep(&mut rng, &mut weights);
        trace.push(state.log_likelihood());
    }

    let v_beta = v as f64 * params.beta;
    let phi = (0..params.k)
        .map(|t| {
            let denom = state.n_k[t] as f64 + v_beta;
            state.n_kv[t]
                .iter()
                .map(|&c| (c as f64 + params.beta) / denom)
                .collect()
        })
        .collect();
    let k_alpha = params.k as f64 * params.alpha;
    let theta = state
        .n_dk
        .iter()
        .zip(&state.docs)
        .map(|(counts, words)| {
            let denom = words.len() as f64 + k_alpha;
            counts.iter().map(|&c| (c as f64 + params.alpha) / denom).collect()
        })
        .collect();

    Ok(TopicModel {
        version: MODEL_VERSION,
        method: Method::Lda,
        k: params.k,
        alpha: Some(params.alpha),
        beta: Some(params.beta),
        seed: params.seed,
        coherence: 0.0,
        labels: TopicModel::default_labels(params.k),
        phi,
        theta,
        vocab: bow.vocab.tokens().to_vec(),
        doc_ids: bow.doc_ids.clone(),
        doc_lengths: bow.doc_lengths(),
        trace,
    })
}
