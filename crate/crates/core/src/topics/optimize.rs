use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coherence::{coherence, CoherenceMetric};
use super::lda::{lda_fit, LdaParams};
use super::model::{Method, TopicModel};
use super::nmf::{nmf_fit, NmfParams, Weighting};
use super::TopicError;
use crate::corpus::BowMatrix;

/// Candidate grid and fitting settings for model selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub method: Method,
    pub k_candidates: Vec<usize>,
    pub seeds: Vec<u64>,
    pub iterations: usize,
    pub burn_in: usize,
    pub tol: f64,
    /// LDA document prior; `None` means 50/K.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub weighting: Weighting,
    pub coherence_metric: CoherenceMetric,
    pub top_n: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            method: Method::Lda,
            k_candidates: vec![2, 3, 4, 5],
            seeds: vec![1],
            iterations: 1000,
            burn_in: 100,
            tol: 1e-6,
            alpha: None,
            beta: 0.01,
            weighting: Weighting::Tfidf,
            coherence_metric: CoherenceMetric::Umass,
            top_n: 10,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<(), TopicError> {
        let bad = |m: &str| Err(TopicError::InvalidConfig(m.to_string()));
        if self.k_candidates.is_empty() || self.seeds.is_empty() {
            return bad("candidate grid is empty (k_candidates and seeds must be non-empty)");
        }
        if self.k_candidates.iter().any(|&k| k < 2) {
            return bad("every K candidate must be at least 2");
        }
        if self.iterations <= self.burn_in {
            return bad("iterations must exceed burn_in");
        }
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if self.top_n < 2 {
            return bad("top_n must be at least 2");
        }
        Ok(())
    }

    pub fn fit_one(&self, bow: &BowMatrix, k: usize, seed: u64) -> Result<TopicModel, TopicError> {
        match self.method {
            Method::Lda => lda_fit(
                bow,
                &LdaParams {
                    k,
                    alpha: self.alpha.unwrap_or(50.0 / k as f64),
                    beta: self.beta,
                    iterations: self.iterations,
                    burn_in: self.burn_in,
                    seed,
                },
            ),
            Method::Nmf => nmf_fit(
                bow,
                &NmfParams {
                    k,
                    max_iter: self.iterations,
                    tol: self.tol,
                    seed,
                    weighting: self.weighting,
                },
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateScore {
    pub k: usize,
    pub seed: u64,
    pub coherence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub method: Method,
    pub metric: CoherenceMetric,
    pub candidates: Vec<CandidateScore>,
    pub selected: usize,
}

/// Index of the best candidate: highest coherence, then smaller K, then smaller seed.
pub fn select_best(candidates: &[CandidateScore]) -> Option<usize> {
    (0..candidates.len()).min_by(|&a, &b| {
        let (x, y) = (&candidates[a], &candidates[b]);
        y.coherence
            .total_cmp(&x.coherence)
            .then(x.k.cmp(&y.k))
            .then(x.seed.cmp(&y.seed))
    })
}

/// Fit every (K, seed) pair and keep the most coherent model.
///
/// Candidates are fitted in parallel; each has its own seed so the outcome
/// does not depend on scheduling.
pub fn optimize_model(bow: &BowMatrix, config: &FitConfig) -> Result<(TopicModel, SelectionReport), TopicError> {
    config.validate()?;
    let grid: Vec<(usize, u64)> = config
        .k_candidates
        .iter()
        .flat_map(|&k| config.seeds.iter().map(move |&s| (k, s)))
        .collect();
    let fitted: Vec<TopicModel> = grid
        .par_iter()
        .map(|&(k, seed)| {
            let mut model = config.fit_one(bow, k, seed).map_err(|e| TopicError::Candidate {
                method: config.method,
                k,
                seed,
                source: Box::new(e),
            })?;
            model.coherence = coherence(&model, bow, config.coherence_metric, config.top_n);
            Ok(model)
        })
        .collect::<Result<_, TopicError>>()?;

    let candidates: Vec<CandidateScore> = fitted
        .iter()
        .map(|m| CandidateScore {
            k: m.k,
            seed: m.seed,
            coherence: m.coherence,
        })
        .collect();
    let selected = select_best(&candidates).expect("grid validated non-empty");
    let model = fitted.into_iter().nth(selected).expect("index from the same list");
    Ok((
        model,
        SelectionReport {
            method: config.method,
            metric: config.coherence_metric,
            candidates,
            selected,
        },
    ))
}
