//! Analysis bundle, HTTP API and CLI plumbing.

use std::path::PathBuf;

pub mod api;
pub mod bundle;
pub mod config;
pub mod pipeline;

pub use api::{router, serve, Api, ApiResponse};
pub use bundle::{load_bundle, save_bundle, AnalysisBundle, BundleManifest, SectionBundle, BUNDLE_VERSION};
pub use config::{AppConfig, PipelineConfig};

#[derive(Debug, thiserror::Error)]
pub enum ServiceError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: schema violation: {reason}", file.display())]
    SchemaViolation { file: PathBuf, reason: String },
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("dangling reference: {0}")]
    DanglingReference(String),
    #[error("bundle version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("{} not found; run the {stage} stage first", path.display())]
    MissingStage { stage: &'static str, path: PathBuf },
    #[error("section {section:?}: {source}")]
    Section {
        section: String,
        #[source]
        source: Box<ServiceError>,
    },
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
    #[error(transparent)]
    Topic(#[from] crate::topics::TopicError),
    #[error(transparent)]
    Analysis(#[from] crate::analysis::AnalysisError),
    #[error(transparent)]
    Summarize(#[from] crate::summarize::SummarizeError),
}

impl ServiceError {
    /// 1 for usage and configuration errors, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ServiceError::Usage(_) => 1,
            ServiceError::Topic(crate::topics::TopicError::InvalidConfig(_)) => 1,
            ServiceError::Section { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
