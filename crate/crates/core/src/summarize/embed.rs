use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::sentences::SentenceSet;
use super::SummarizeError;
use crate::corpus::{normalize_token, tokenize, BowMatrix, PreprocessOptions, Vocabulary};

/// TF-IDF sentence vectors over a section vocabulary, L2-normalized.
#[derive(Debug, Clone)]
pub struct LexicalEmbedder {
    vocab: Vocabulary,
    idf: Vec<f64>,
    options: PreprocessOptions,
}

impl LexicalEmbedder {
    pub fn from_bow(bow: &BowMatrix, options: PreprocessOptions) -> Self {
        let n = bow.n_docs() as f64;
        let idf = bow
            .doc_freq()
            .iter()
            .map(|&df| ((1.0 + n) / (1.0 + df as f64)).ln() + 1.0)
            .collect();
        Self {
            vocab: bow.vocab.clone(),
            idf,
            options,
        }
    }

    pub fn dimension(&self) -> usize {
        self.vocab.len()
    }

    pub fn embed(&self, text: &str) -> Vec<f64> {
        let mut v = vec![0.0; self.vocab.len()];
        for token in tokenize(text) {
            if let Some(id) = normalize_token(&token, &self.options).and_then(|t| self.vocab.id_of(&t)) {
                v[id] += self.idf[id];
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

/// OpenAI-compatible `/embeddings` endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalEmbeddingConfig {
    pub endpoint: String,
    pub model: String,
    pub api_key_env: String,
    pub dimension: usize,
    #[serde(default = "default_batch")]
    pub batch_size: usize,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_batch() -> usize {
    32
}

fn default_timeout() -> u64 {
    60
}

#[derive(Debug, Clone)]
pub enum EmbeddingProvider {
    BuiltinLexical(LexicalEmbedder),
    ExternalHttp(ExternalEmbeddingConfig),
}

impl EmbeddingProvider {
    pub fn dimension(&self) -> usize {
        match self {
            EmbeddingProvider::BuiltinLexical(e) => e.dimension(),
            EmbeddingProvider::ExternalHttp(c) => c.dimension,
        }
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

pub fn embed_sentences(set: &SentenceSet, provider: &EmbeddingProvider) -> Result<Vec<Vec<f64>>, SummarizeError> {
    match provider {
        EmbeddingProvider::BuiltinLexical(e) => Ok(set.sentences.iter().map(|s| e.embed(&s.text)).collect()),
        EmbeddingProvider::ExternalHttp(config) => embed_external(set, config),
    }
}

fn embed_external(set: &SentenceSet, config: &ExternalEmbeddingConfig) -> Result<Vec<Vec<f64>>, SummarizeError> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
        .build()
        .into();
    let url = format!("{}/embeddings", config.endpoint.trim_end_matches('/'));
    let unavailable = |e: String| SummarizeError::ProviderUnavailable(e);
    let mut out = Vec::with_capacity(set.len());
    for batch in set.sentences.chunks(config.batch_size.max(1)) {
        let input: Vec<&str> = batch.iter().map(|s| s.text.as_str()).collect();
        let mut req = agent.post(&url);
        if let Ok(key) = std::env::var(&config.api_key_env) {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req
            .send_json(json!({"model": config.model, "input": input}))
            .map_err(|e| unavailable(e.to_string()))?;
        let body: EmbeddingResponse = resp.body_mut().read_json().map_err(|e| unavailable(e.to_string()))?;
        let mut data = body.data;
        if data.len() != batch.len() {
            return Err(unavailable(format!(
                "expected {} embeddings, got {}",
                batch.len(),
                data.len()
            )));
        }
        data.sort_by_key(|d| d.index);
        for d in data {
            if d.embedding.len() != config.dimension {
                return Err(SummarizeError::DimensionMismatch {
                    expected: config.dimension,
                    got: d.embedding.len(),
                });
            }
            if d.embedding.iter().any(|x| !x.is_finite()) {
                return Err(unavailable("non-finite embedding component".into()));
            }
            out.push(d.embedding);
        }
    }
    Ok(out)
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    #[serde(default)]
    index: usize,
    embedding: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::build_vocabulary;
    use crate::summarize::split_sentences;

    fn embedder() -> LexicalEmbedder {
        let docs = vec![
            vec!["energi".to_string(), "grid".to_string(), "rail".to_string()],
            vec!["energi".to_string(), "rail".to_string(), "wind".to_string()],
        ];
        let vocab = build_vocabulary(&docs, 1, 1.0).unwrap();
        let rows = docs.iter().map(|d| crate::corpus::to_bow(d, &vocab)).collect();
        let bow = BowMatrix {
            section_id: "s".into(),
            doc_ids: vec!["a".into(), "b".into()],
            vocab,
            rows,
        };
        LexicalEmbedder::from_bow(&bow, PreprocessOptions::default())
    }

    #[test]
    fn identical_sentences_identical_vectors() {
        let p = EmbeddingProvider::BuiltinLexical(embedder());
        let set = split_sentences("Energy grid. Energy grid.");
        let v = embed_sentences(&set, &p).unwrap();
        assert_eq!(v[0], v[1]);
        assert!((cosine(&v[0], &v[1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_sentences_orthogonal() {
        let p = EmbeddingProvider::BuiltinLexical(embedder());
        let set = split_sentences("Energy grids. Rail and wind.");
        let v = embed_sentences(&set, &p).unwrap();
        assert_eq!(cosine(&v[0], &v[1]), 0.0);
        let norm: f64 = v[0].iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}
