use serde::{Deserialize, Serialize};

use super::TopicError;

pub const MODEL_VERSION: u32 = 1;
const STOCHASTIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lda,
    Nmf,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Lda => "lda",
            Method::Nmf => "nmf",
        })
    }
}

/// A fitted topic model; also the on-disk model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub version: u32,
    pub method: Method,
    #[serde(rename = "K")]
    pub k: usize,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub seed: u64,
    pub coherence: f64,
    pub labels: Vec<String>,
    /// K×V topic-word distributions.
    pub phi: Vec<Vec<f64>>,
    /// D×K document-topic distributions.
    pub theta: Vec<Vec<f64>>,
    pub vocab: Vec<String>,
    pub doc_ids: Vec<String>,
    /// In-vocabulary token count per document.
    pub doc_lengths: Vec<u64>,
    /// Corpus log-likelihood per Gibbs sweep (LDA) or Frobenius error per update (NMF).
    #[serde(default)]
    pub trace: Vec<f64>,
}

impl TopicModel {
    pub fn n_docs(&self) -> usize {
        self.theta.len()
    }

    pub fn n_terms(&self) -> usize {
        self.vocab.len()
    }

    pub fn default_labels(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("topic-{i}")).collect()
    }

    /// Term ids of topic `k` ordered by descending probability, ties by id.
    pub fn top_term_ids(&self, topic: usize, n: usize) -> Vec<usize> {
        let row = &self.phi[topic];
        let mut ids: Vec<usize> = (0..row.len()).collect();
        ids.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
        ids.truncate(n);
        ids
    }

    pub fn top_terms(&self, topic: usize, n: usize) -> Vec<&str> {
        self.top_term_ids(topic, n)
            .into_iter()
            .map(|id| self.vocab[id].as_str())
            .collect()
    }

    /// Topic prevalence p(t): θ columns averaged with document token-count weights.
    pub fn topic_prevalence(&self) -> Vec<f64> {
        let total: f64 = self.doc_lengths.iter().map(|&n| n as f64).sum();
        let mut p = vec![0.0; self.k];
        for (row, &len) in self.theta.iter().zip(&self.doc_lengths) {
            for (pk, &t) in p.iter_mut().zip(row) {
                *pk += len as f64 * t;
            }
        }
        if total > 0.0 {
            p.iter_mut().for_each(|v| *v /= total);
        } else {
            p.iter_mut().for_each(|v| *v = 1.0 / self.k as f64);
        }
        p
    }

    pub fn validate(&self) -> Result<(), TopicError> {
        let bad = |reason: String| Err(TopicError::InvalidModel(reason));
        if self.k == 0 {
            return bad("K must be positive".into());
        }
        if self.phi.len() != self.k {
            return bad(format!("phi has {} rows, expected K={}", self.phi.len(), self.k));
        }
        if self.labels.len() != self.k {
            return bad(format!("{} labels for K={}", self.labels.len(), self.k));
        }
        if self.theta.len() != self.doc_ids.len() || self.doc_lengths.len() != self.doc_ids.len() {
            return bad("theta, doc_ids and doc_lengths lengths differ".into());
        }
        for (name, rows, width) in [("phi", &self.phi, self.vocab.len()), ("theta", &self.theta, self.k)] {
            for (i, row) in rows.iter().enumerate() {
                if row.len() != width {
                    return bad(format!("{name}[{i}] has length {}, expected {width}", row.len()));
                }
                if row.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                    return bad(format!("{name}[{i}] has a negative or non-finite entry"));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > STOCHASTIC_TOL {
                    return bad(format!("{name}[{i}] sums to {sum}"));
                }
            }
        }
        Ok(())
    }
}

/// Normalize a non-negative vector to sum 1; an all-zero vector becomes uniform.
pub(crate) fn normalize(row: &[f64]) -> Vec<f64> {
    let sum: f64 = row.iter().sum();
    if sum > 0.0 {
        row.iter().map(|x| x / sum).collect()
    } else {
        vec![1.0 / row.len() as f64; row.len()]
    }
}
