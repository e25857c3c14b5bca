//! Hybrid summarization: extractive sentence selection over sentence
//! embeddings, then an abstractive LLM pass that must fit a word budget.

pub mod embed;
pub mod llm;
pub mod sentences;

use serde::{Deserialize, Serialize};

pub use embed::{cosine, embed_sentences, EmbeddingProvider, ExternalEmbeddingConfig, LexicalEmbedder};
pub use llm::{Completion, LlmClient, LlmConfig, LlmError, LlmRequest, DEFAULT_API_KEY_ENV};
pub use sentences::{split_sentences, word_count, Sentence, SentenceSet};

use crate::analysis::kmeans::{kmeans_points, squared_euclidean};

pub const DEFAULT_PROMPT: &str = "Summarize the text above in three sentences";
pub const PROMPT_TLDR: &str = "tl;dr";
pub const PROMPT_PLAIN: &str = "summarize the text above";
pub const DEFAULT_WORD_BUDGET: usize = 3000;
/// Rough tokens-per-word ratio for sizing against model context limits.
pub const TOKENS_PER_WORD: f64 = 1.3;
pub const DEFAULT_RATIO: f64 = 0.2;
pub const DEFAULT_MIN_SENTENCES: usize = 3;
pub const DEFAULT_PARALLELISM: usize = 2;
const EXTRACTIVE_RESTARTS: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum SummarizeError {
    #[error("cannot select {n} of {count} sentences")]
    BadN { n: usize, count: usize },
    #[error("input has {actual} words, budget is {budget}")]
    InputTooLarge { budget: usize, actual: usize },
    #[error("embedding provider unavailable: {0}")]
    ProviderUnavailable(String),
    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("no embedding provider for section '{0}'")]
    MissingProvider(String),
    #[error("{doc_id}/{section_id}: {source}")]
    Section {
        doc_id: String,
        section_id: String,
        #[source]
        source: Box<SummarizeError>,
    },
    #[error(transparent)]
    Llm(#[from] LlmError),
}

pub fn estimated_tokens(words: usize) -> usize {
    (words as f64 * TOKENS_PER_WORD).ceil() as usize
}

/// Pick `n` sentence indices: k-means (k = n) over the vectors, the nearest
/// unused sentence to each centroid, returned in document order.
pub fn extractive_select(vectors: &[Vec<f64>], n: usize, seed: u64) -> Result<Vec<usize>, SummarizeError> {
    let count = vectors.len();
    if n < 1 || n > count {
        return Err(SummarizeError::BadN { n, count });
    }
    if n == count {
        return Ok((0..count).collect());
    }
    let fit = kmeans_points(vectors, n, seed, EXTRACTIVE_RESTARTS).map_err(|_| SummarizeError::BadN { n, count })?;
    let mut used = vec![false; count];
    let mut picked = Vec::with_capacity(n);
    for centroid in &fit.centroids {
        // nearest sentence not already taken; a repeat falls through to the next-nearest
        let best = (0..count)
            .filter(|&i| !used[i])
            .min_by(|&a, &b| {
                squared_euclidean(&vectors[a], centroid)
                    .total_cmp(&squared_euclidean(&vectors[b], centroid))
                    .then(a.cmp(&b))
            })
            .expect("n < count leaves an unused sentence");
        used[best] = true;
        picked.push(best);
    }
    picked.sort_unstable();
    Ok(picked)
}

/// Send `text` + prompt to the LLM. Refuses input over `budget` words.
pub fn abstractive_summary(
    client: &LlmClient,
    text: &str,
    prompt: &str,
    budget: usize,
) -> Result<Completion, SummarizeError> {
    let actual = word_count(text);
    if actual > budget {
        return Err(SummarizeError::InputTooLarge { budget, actual });
    }
    let completion = client.complete(&LlmRequest::Summary {
        text: text.to_string(),
        prompt: prompt.to_string(),
    })?;
    Ok(Completion {
        text: completion.text.trim().to_string(),
        retries: completion.retries,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SummarizeOptions {
    pub budget_words: usize,
    pub prompt: String,
    /// Starting fraction of sentences kept when a section must be reduced.
    pub ratio: f64,
    pub min_sentences: usize,
    pub seed: u64,
    pub parallelism: usize,
}

impl Default for SummarizeOptions {
    fn default() -> Self {
        Self {
            budget_words: DEFAULT_WORD_BUDGET,
            prompt: DEFAULT_PROMPT.into(),
            ratio: DEFAULT_RATIO,
            min_sentences: DEFAULT_MIN_SENTENCES,
            seed: 0,
            parallelism: DEFAULT_PARALLELISM,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SummaryPath {
    Direct,
    Extractive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionSummary {
    pub doc_id: String,
    pub section_id: String,
    pub path: SummaryPath,
    pub summary: String,
    /// Words sent to the LLM.
    pub input_words: usize,
    pub budget_words: usize,
    /// Section sentences, for highlighting.
    pub sentences: Vec<String>,
    /// Indices into `sentences` kept by the extractive stage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selected: Option<Vec<usize>>,
    pub retries: u32,
}

fn joined(set: &SentenceSet, indices: &[usize]) -> String {
    indices
        .iter()
        .map(|&i| set.sentences[i].text.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn summarize_section(
    doc_id: &str,
    section_id: &str,
    text: &str,
    client: &LlmClient,
    provider: &EmbeddingProvider,
    options: &SummarizeOptions,
) -> Result<SectionSummary, SummarizeError> {
    let mut set = split_sentences(text);
    set.doc_id = Some(doc_id.to_string());
    set.section_id = Some(section_id.to_string());
    let all: Vec<usize> = (0..set.len()).collect();
    let full = joined(&set, &all);
    let budget = options.budget_words;
    let mut out = SectionSummary {
        doc_id: doc_id.to_string(),
        section_id: section_id.to_string(),
        path: SummaryPath::Direct,
        summary: String::new(),
        input_words: 0,
        budget_words: budget,
        sentences: set.texts().into_iter().map(str::to_string).collect(),
        selected: None,
        retries: 0,
    };
    if set.is_empty() {
        return Ok(out);
    }

    let input = if word_count(&full) <= budget {
        full
    } else {
        let vectors = embed_sentences(&set, provider)?;
        let count = set.len();
        let start = ((options.ratio * count as f64).ceil() as usize)
            .max(options.min_sentences)
            .min(count);
        let mut chosen = None;
        for n in (1..=start).rev() {
            let picked = extractive_select(&vectors, n, options.seed)?;
            if word_count(&joined(&set, &picked)) <= budget {
                chosen = Some(picked);
                break;
            }
        }
        let picked = chosen.ok_or_else(|| SummarizeError::InputTooLarge {
            budget,
            actual: set.sentences.iter().map(|s| word_count(&s.text)).min().unwrap_or(0),
        })?;
        out.path = SummaryPath::Extractive;
        let text = joined(&set, &picked);
        out.selected = Some(picked);
        text
    };
    out.input_words = word_count(&input);
    let completion = abstractive_summary(client, &input, &options.prompt, budget)?;
    out.summary = completion.text;
    out.retries = completion.retries;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummaryJob {
    pub doc_id: String,
    pub section_id: String,
    pub text: String,
}

/// Summarize many sections with at most `options.parallelism` in flight.
/// Results come back in job order regardless of completion order.
pub fn summarize_all<F>(
    jobs: &[SummaryJob],
    client: &LlmClient,
    provider_for: F,
    options: &SummarizeOptions,
) -> Result<Vec<SectionSummary>, SummarizeError>
where
    F: Fn(&str) -> Option<EmbeddingProvider> + Sync,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.parallelism.max(1))
        .build()
        .map_err(|e| SummarizeError::ProviderUnavailable(e.to_string()))?;
    pool.install(|| {
        jobs.par_iter()
            .map(|job| {
                let wrap = |e: SummarizeError| SummarizeError::Section {
                    doc_id: job.doc_id.clone(),
                    section_id: job.section_id.clone(),
                    source: Box::new(e),
                };
                let provider = provider_for(&job.section_id)
                    .ok_or_else(|| wrap(SummarizeError::MissingProvider(job.section_id.clone())))?;
                summarize_section(&job.doc_id, &job.section_id, &job.text, client, &provider, options).map_err(wrap)
            })
            .collect()
    })
}
