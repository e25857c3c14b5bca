use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::model::TopicModel;
use crate::corpus::BowMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoherenceMetric {
    #[default]
    Umass,
    Npmi,
}

/// Document co-occurrence statistics over a fixed set of term ids.
struct CoDocCounts {
    n_docs: usize,
    doc_sets: Vec<HashSet<usize>>,
}

impl CoDocCounts {
    fn new(bow: &BowMatrix) -> Self {
        Self {
            n_docs: bow.n_docs(),
            doc_sets: bow.rows.iter().map(|r| r.iter().map(|&(id, _)| id).collect()).collect(),
        }
    }

    fn df(&self, w: usize) -> usize {
        self.doc_sets.iter().filter(|s| s.contains(&w)).count()
    }

    fn co_df(&self, a: usize, b: usize) -> usize {
        self.doc_sets
            .iter()
            .filter(|s| s.contains(&a) && s.contains(&b))
            .count()
    }
}

/// UMass pair term for ranked words `lower` (later) and `higher` (earlier):
/// `ln((D(lower, higher) + 1) / D(higher))`. Zero when `higher` never occurs.
pub fn umass_pair(co_df: usize, df_higher: usize) -> f64 {
    if df_higher == 0 {
        return 0.0;
    }
    ((co_df as f64 + 1.0) / df_higher as f64).ln()
}

/// Normalized PMI of a word pair from document frequencies.
///
/// Never co-occurring pairs score −1. When the pair occurs in every document
/// the ratio is 0/0 and the score is defined as 0, so a perfect score of 1 is
/// unreachable for words present everywhere.
pub fn npmi_pair(co_df: usize, df_a: usize, df_b: usize, n_docs: usize) -> f64 {
    if co_df == 0 || df_a == 0 || df_b == 0 {
        return -1.0;
    }
    let n = n_docs as f64;
    let p_ab = co_df as f64 / n;
    let p_a = df_a as f64 / n;
    let p_b = df_b as f64 / n;
    let denom = -p_ab.ln();
    if denom == 0.0 {
        return 0.0;
    }
    ((p_ab / (p_a * p_b)).ln() / denom).clamp(-1.0, 1.0)
}

/// Mean over topics of the per-topic coherence of its `top_n` words.
///
/// UMass sums pair terms over every ordered pair (earlier word as the
/// conditioning word); NPMI averages the pair scores.
pub fn coherence(model: &TopicModel, bow: &BowMatrix, metric: CoherenceMetric, top_n: usize) -> f64 {
    let counts = CoDocCounts::new(bow);
    let top_n = top_n.min(model.n_terms());
    let mut total = 0.0;
    for topic in 0..model.k {
        let words = model.top_term_ids(topic, top_n);
        let mut score = 0.0;
        let mut pairs = 0usize;
        for m in 1..words.len() {
            for l in 0..m {
                let co = counts.co_df(words[m], words[l]);
                score += match metric {
                    CoherenceMetric::Umass => umass_pair(co, counts.df(words[l])),
                    CoherenceMetric::Npmi => npmi_pair(co, counts.df(words[m]), counts.df(words[l]), counts.n_docs),
                };
                pairs += 1;
            }
        }
        if metric == CoherenceMetric::Npmi && pairs > 0 {
            score /= pairs as f64;
        }
        total += score;
    }
    total / model.k as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Vocabulary;
    use crate::topics::model::{Method, MODEL_VERSION};

    fn two_doc_bow(rows: Vec<Vec<(usize, u32)>>) -> BowMatrix {
        BowMatrix {
            section_id: "s".into(),
            doc_ids: (0..rows.len()).map(|i| format!("d{i}")).collect(),
            vocab: Vocabulary::from_parts(vec!["a".into(), "b".into(), "c".into()], vec![1; 3]),
            rows,
        }
    }

    fn model(phi: Vec<Vec<f64>>) -> TopicModel {
        let k = phi.len();
        TopicModel {
            version: MODEL_VERSION,
            method: Method::Lda,
            k,
            alpha: None,
            beta: None,
            seed: 0,
            coherence: 0.0,
            labels: TopicModel::default_labels(k),
            phi,
            theta: vec![],
            vocab: vec!["a".into(), "b".into(), "c".into()],
            doc_ids: vec![],
            doc_lengths: vec![],
            trace: vec![],
        }
    }

    #[test]
    fn always_co_occurring_pair() {
        let bow = two_doc_bow(vec![vec![(0, 1), (1, 2)], vec![(0, 3), (1, 1)]]);
        let m = model(vec![vec![0.6, 0.3, 0.1]]);
        let c = coherence(&m, &bow, CoherenceMetric::Umass, 2);
        assert!((c - 1.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn never_co_occurring_words_score_negative() {
        let bow = two_doc_bow(vec![vec![(0, 1)], vec![(1, 1)], vec![(1, 1), (2, 1)]]);
        let m = model(vec![vec![0.5, 0.4, 0.1]]);
        // top words a (df 1) then b (df 2): pair term ln(1 / D(a)) = 0 here,
        // reverse ranking conditions on b: ln(1/2) < 0
        let m2 = model(vec![vec![0.4, 0.5, 0.1]]);
        assert_eq!(coherence(&m, &bow, CoherenceMetric::Umass, 2), (1.0f64 / 1.0).ln());
        assert!((coherence(&m2, &bow, CoherenceMetric::Umass, 2) - 0.5f64.ln()).abs() < 1e-15);
        assert!(coherence(&m2, &bow, CoherenceMetric::Umass, 2) < 0.0);
    }

    #[test]
    fn npmi_edges() {
        // present in every document: 0/0 defined as 0
        assert_eq!(npmi_pair(4, 4, 4, 4), 0.0);
        assert_eq!(npmi_pair(0, 2, 2, 4), -1.0);
        // perfectly co-occurring but not everywhere reaches 1
        assert!((npmi_pair(2, 2, 2, 4) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn npmi_in_unit_interval() {
        let bow = two_doc_bow(vec![vec![(0, 1), (1, 1)], vec![(1, 1), (2, 1)], vec![(2, 1)]]);
        let m = model(vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.2, 0.7]]);
        let c = coherence(&m, &bow, CoherenceMetric::Npmi, 3);
        assert!((-1.0..=1.0).contains(&c));
    }
}
