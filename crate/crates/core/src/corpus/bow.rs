use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::vocab::Vocabulary;

/// Sparse counts `(token_id, count)`, ascending by id, counts strictly positive.
pub type BowRow = Vec<(usize, u32)>;

pub fn to_bow<S: AsRef<str>>(tokens: &[S], vocab: &Vocabulary) -> BowRow {
    let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
    for t in tokens {
        if let Some(id) = vocab.id_of(t.as_ref()) {
            *counts.entry(id).or_default() += 1;
        }
    }
    counts.into_iter().collect()
}

/// Document-term counts for one section id. Rows align with `doc_ids`; only
/// documents that contain the section appear.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BowMatrix {
    pub section_id: String,
    pub doc_ids: Vec<String>,
    pub vocab: Vocabulary,
    pub rows: Vec<BowRow>,
}

impl BowMatrix {
    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_terms(&self) -> usize {
        self.vocab.len()
    }

    pub fn doc_lengths(&self) -> Vec<u64> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(_, c)| c as u64).sum())
            .collect()
    }

    pub fn total_tokens(&self) -> u64 {
        self.doc_lengths().iter().sum()
    }

    pub fn dense(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|row| {
                let mut out = vec![0.0; self.n_terms()];
                for &(id, c) in row {
                    out[id] = c as f64;
                }
                out
            })
            .collect()
    }

    /// Token-id stream per document, ids repeated by count in ascending id order.
    pub fn token_streams(&self) -> Vec<Vec<usize>> {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .flat_map(|&(id, c)| std::iter::repeat_n(id, c as usize))
                    .collect()
            })
            .collect()
    }

    /// Number of documents containing each term.
    pub fn doc_freq(&self) -> Vec<usize> {
        let mut df = vec![0; self.n_terms()];
        for row in &self.rows {
            for &(id, _) in row {
                df[id] += 1;
            }
        }
        df
    }

    /// Smoothed TF-IDF: `count * (ln((1 + D) / (1 + df)) + 1)`.
    pub fn tfidf(&self) -> Vec<Vec<f64>> {
        let n = self.n_docs() as f64;
        let idf: Vec<f64> = self
            .doc_freq()
            .iter()
            .map(|&df| ((1.0 + n) / (1.0 + df as f64)).ln() + 1.0)
            .collect();
        let mut m = self.dense();
        for row in &mut m {
            for (v, w) in row.iter_mut().zip(&idf) {
                *v *= w;
            }
        }
        m
    }
}
