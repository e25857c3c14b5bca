use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::CorpusError;

pub const DEFAULT_MIN_DF: usize = 2;
pub const DEFAULT_MAX_DF: f64 = 0.95;

/// Dense token ids in lexicographic token order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "VocabularyRepr", into = "VocabularyRepr")]
pub struct Vocabulary {
    tokens: Vec<String>,
    doc_freq: Vec<usize>,
    ids: HashMap<String, usize>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRepr {
    tokens: Vec<String>,
    doc_freq: Vec<usize>,
}

impl From<VocabularyRepr> for Vocabulary {
    fn from(r: VocabularyRepr) -> Self {
        Vocabulary::from_parts(r.tokens, r.doc_freq)
    }
}

impl From<Vocabulary> for VocabularyRepr {
    fn from(v: Vocabulary) -> Self {
        VocabularyRepr {
            tokens: v.tokens,
            doc_freq: v.doc_freq,
        }
    }
}

impl Vocabulary {
    pub fn from_parts(tokens: Vec<String>, doc_freq: Vec<usize>) -> Self {
        let ids = tokens.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self { tokens, doc_freq, ids }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id_of(&self, token: &str) -> Option<usize> {
        self.ids.get(token).copied()
    }

    pub fn token_of(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn doc_freq(&self, id: usize) -> usize {
        self.doc_freq[id]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }
}

/// Keep tokens whose document frequency satisfies `df >= min_df` and `df / D <= max_df`.
/// Each element of `documents` is one document's token stream.
pub fn build_vocabulary<S: AsRef<[String]>>(
    documents: &[S],
    min_df: usize,
    max_df: f64,
) -> Result<Vocabulary, CorpusError> {
    if min_df < 1 {
        return Err(CorpusError::schema("min_df", "must be at least 1"));
    }
    if !(max_df > 0.0 && max_df <= 1.0) {
        return Err(CorpusError::schema("max_df", "must lie in (0, 1]"));
    }
    let n_docs = documents.len();
    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in documents {
        let unique: BTreeSet<&str> = doc.as_ref().iter().map(String::as_str).collect();
        for token in unique {
            *df.entry(token).or_default() += 1;
        }
    }
    let (tokens, doc_freq): (Vec<String>, Vec<usize>) = df
        .into_iter()
        .filter(|&(_, count)| count >= min_df && count as f64 / n_docs as f64 <= max_df)
        .map(|(t, c)| (t.to_string(), c))
        .unzip();
    if tokens.is_empty() {
        return Err(CorpusError::EmptyVocabulary { min_df, max_df });
    }
    Ok(Vocabulary::from_parts(tokens, doc_freq))
}
