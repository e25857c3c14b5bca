//! Per-section topic models: LDA by collapsed Gibbs sampling, NMF by
//! multiplicative updates, coherence scoring, grid selection and labeling.

mod coherence;
mod label;
mod lda;
mod model;
mod nmf;
mod optimize;

pub use coherence::{coherence, npmi_pair, umass_pair, CoherenceMetric};
pub use label::{label_prompt, label_topics, LabelMode, LABEL_TOP_WORDS};
pub use lda::{lda_fit, LdaParams};
pub use model::{Method, TopicModel, MODEL_VERSION};
pub use nmf::{frobenius_error, nmf_factorize, nmf_fit, NmfFactors, NmfParams, Weighting};
pub use optimize::{optimize_model, select_best, CandidateScore, FitConfig, SelectionReport};

use crate::summarize::llm::LlmError;

#[derive(Debug, thiserror::Error)]
pub enum TopicError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("document {0:?} has no in-vocabulary tokens")]
    EmptyDocument(String),
    #[error("K={k} is degenerate for a corpus of {tokens} tokens")]
    DegenerateK { k: usize, tokens: usize },
    #[error("negative or non-finite input at row {row}, column {col}")]
    NegativeInput { row: usize, col: usize },
    #[error("row {0} is all zeros")]
    AllZeroRow(usize),
    #[error("expected {expected} labels, got {got}")]
    LabelCountMismatch { expected: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("candidate {method} K={k} seed={seed} failed: {source}")]
    Candidate {
        method: Method,
        k: usize,
        seed: u64,
        #[source]
        source: Box<TopicError>,
    },
    #[error(transparent)]
    Llm(#[from] LlmError),
}
