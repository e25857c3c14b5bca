//! Term relevance (per topic) and saliency (corpus level).

use serde::{Deserialize, Serialize};

use crate::topics::TopicModel;

pub const DEFAULT_LAMBDA: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermScore {
    pub term: String,
    pub id: usize,
    pub score: f64,
    /// p(w|t)
    pub phi: f64,
    /// ln(p(w|t) / p(w))
    pub lift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SalientTerm {
    pub term: String,
    pub id: usize,
    pub saliency: f64,
    /// p(w)
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRanking {
    pub lambda: f64,
    pub top_n: usize,
    /// One descending list per topic.
    pub topics: Vec<Vec<TermScore>>,
    /// Descending corpus-level ranking over all terms.
    pub saliency: Vec<SalientTerm>,
}

/// p(w) = Σ_t p(w|t) p(t).
pub fn marginal_term_probability(phi: &[Vec<f64>], p_topic: &[f64]) -> Vec<f64> {
    let v = phi.first().map_or(0, Vec::len);
    let mut pw = vec![0.0; v];
    for (row, &pt) in phi.iter().zip(p_topic) {
        for (w, &x) in pw.iter_mut().zip(row) {
            *w += x * pt;
        }
    }
    pw
}

/// λ·ln p(w|t) + (1−λ)·ln(p(w|t)/p(w)).
pub fn relevance_score(phi: f64, pw: f64, lambda: f64) -> f64 {
    lambda * phi.ln() + (1.0 - lambda) * (phi / pw).ln()
}

/// Per-topic rankings. Terms with p(w|t) = 0 have score −∞ and are left out;
/// equal scores are ordered by larger p(w|t), then smaller id.
pub fn relevance_lists(
    phi: &[Vec<f64>],
    p_topic: &[f64],
    vocab: &[String],
    lambda: f64,
    top_n: usize,
) -> Vec<Vec<TermScore>> {
    let lambda = lambda.clamp(0.0, 1.0);
    let pw = marginal_term_probability(phi, p_topic);
    phi.iter()
        .map(|row| {
            let mut scored: Vec<TermScore> = row
                .iter()
                .enumerate()
                .filter(|&(_, &x)| x > 0.0)
                .map(|(id, &x)| TermScore {
                    term: vocab[id].clone(),
                    id,
                    score: relevance_score(x, pw[id], lambda),
                    phi: x,
                    lift: (x / pw[id]).ln(),
                })
                .collect();
            scored.sort_by(|a, b| {
                b.score
                    .total_cmp(&a.score)
                    .then(b.phi.total_cmp(&a.phi))
                    .then(a.id.cmp(&b.id))
            });
            scored.truncate(top_n);
            scored
        })
        .collect()
}

/// Saliency p(w)·Σ_t p(t|w)·ln(p(t|w)/p(t)), one value per term id.
pub fn saliency_scores(phi: &[Vec<f64>], p_topic: &[f64]) -> Vec<f64> {
    let pw = marginal_term_probability(phi, p_topic);
    pw.iter()
        .enumerate()
        .map(|(w, &p)| {
            if p <= 0.0 {
                return 0.0;
            }
            let distinct: f64 = phi
                .iter()
                .zip(p_topic)
                .filter(|&(row, &pt)| row[w] > 0.0 && pt > 0.0)
                .map(|(row, &pt)| {
                    let post = row[w] * pt / p;
                    post * (post / pt).ln()
                })
                .sum();
            // KL is non-negative; only rounding can push it below zero
            (p * distinct).max(0.0)
        })
        .collect()
}

pub fn relevance(model: &TopicModel, lambda: f64, top_n: usize) -> TermRanking {
    let p_topic = model.topic_prevalence();
    let topics = relevance_lists(&model.phi, &p_topic, &model.vocab, lambda, top_n);
    TermRanking {
        lambda: lambda.clamp(0.0, 1.0),
        top_n,
        topics,
        saliency: saliency(model),
    }
}

/// Terms by descending saliency, ties by id.
pub fn saliency(model: &TopicModel) -> Vec<SalientTerm> {
    let p_topic = model.topic_prevalence();
    let pw = marginal_term_probability(&model.phi, &p_topic);
    let scores = saliency_scores(&model.phi, &p_topic);
    let mut out: Vec<SalientTerm> = scores
        .into_iter()
        .enumerate()
        .map(|(id, saliency)| SalientTerm {
            term: model.vocab[id].clone(),
            id,
            saliency,
            frequency: pw[id],
        })
        .collect();
    out.sort_by(|a, b| b.saliency.total_cmp(&a.saliency).then(a.id.cmp(&b.id)));
    out
}
