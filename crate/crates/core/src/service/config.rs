use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::ServiceError;
use crate::analysis::{ClusterParams, CorrelationMethod, KMeansSpace, Linkage, MappingMethod, Metric, DEFAULT_LAMBDA};
use crate::summarize::{ExternalEmbeddingConfig, LlmConfig, SummarizeOptions};
use crate::topics::FitConfig;

/// Settings for the `analyze` stage. Every clustering variant listed here is
/// computed once and stored; the server only selects among them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub metric: Metric,
    pub clustering: Vec<ClusterParams>,
    pub mappings: Vec<MappingMethod>,
    pub tsne_seed: u64,
    /// `None` means min(30, (n − 1)/3).
    pub tsne_perplexity: Option<f64>,
    pub tsne_iterations: usize,
    pub lambda: f64,
    pub top_n_terms: usize,
    pub correlation_methods: Vec<CorrelationMethod>,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        let mut clustering = Vec::new();
        for k in [2, 3, 4] {
            clustering.push(ClusterParams::Hierarchical {
                linkage: Linkage::Average,
                k,
                metric: Metric::Jsd,
            });
        }
        for k in [2, 3, 4] {
            clustering.push(ClusterParams::Kmeans {
                k,
                seed: 0,
                restarts: 10,
                space: KMeansSpace::Hellinger,
            });
        }
        clustering.push(ClusterParams::Hdbscan {
            min_cluster_size: 2,
            min_samples: 2,
            metric: Metric::Jsd,
        });
        Self {
            metric: Metric::Jsd,
            clustering,
            mappings: vec![MappingMethod::Mds, MappingMethod::Tsne],
            tsne_seed: 0,
            tsne_perplexity: None,
            tsne_iterations: crate::analysis::tsne::DEFAULT_ITERS,
            lambda: DEFAULT_LAMBDA,
            top_n_terms: 30,
            correlation_methods: vec![CorrelationMethod::Pearson, CorrelationMethod::Spearman],
        }
    }
}

impl AnalyzeConfig {
    pub fn validate(&self) -> Result<(), ServiceError> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(ServiceError::Usage(format!(
                "analyze.lambda = {} is outside [0, 1]",
                self.lambda
            )));
        }
        if self.top_n_terms == 0 {
            return Err(ServiceError::Usage("analyze.top_n_terms must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SummarizeConfig {
    #[serde(flatten)]
    pub options: SummarizeOptions,
    pub llm: LlmConfig,
    /// External embedding endpoint; the builtin lexical embedder when absent.
    pub embedding: Option<ExternalEmbeddingConfig>,
    /// Ask the LLM for topic labels (ignored for sections with manual labels).
    pub label_topics: bool,
}

impl Default for SummarizeConfig {
    fn default() -> Self {
        Self {
            options: SummarizeOptions::default(),
            llm: LlmConfig::default(),
            embedding: None,
            label_topics: true,
        }
    }
}

/// The `--config` file of `fit`; later stages read the snapshot stored next
/// to the models.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub fit: FitConfig,
    /// Manual topic labels per section, overriding LLM labels.
    pub labels: BTreeMap<String, Vec<String>>,
    pub analyze: AnalyzeConfig,
    pub summarize: SummarizeConfig,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), ServiceError> {
        self.fit
            .validate()
            .map_err(|e| ServiceError::Usage(format!("fit: {e}")))?;
        self.analyze.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UiDefaults {
    pub section: Option<String>,
    pub mapping: MappingMethod,
    pub cluster_algo: String,
    pub k: Option<usize>,
    pub lambda: f64,
}

impl Default for UiDefaults {
    fn default() -> Self {
        Self {
            section: None,
            mapping: MappingMethod::Mds,
            cluster_algo: "hierarchical".into(),
            k: None,
            lambda: DEFAULT_LAMBDA,
        }
    }
}

/// `run-app --config` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AppConfig {
    /// Bundle directory; relative paths resolve against the config file.
    pub bundle: PathBuf,
    #[serde(default = "default_host")]
    pub host: String,
    /// 0 picks a free port.
    #[serde(default = "default_port")]
    pub port: u16,
    /// Allowed origins; `"*"` allows any.
    #[serde(default)]
    pub cors_origins: Vec<String>,
    /// Built UI assets served at `/`.
    #[serde(default)]
    pub static_dir: Option<PathBuf>,
    #[serde(default)]
    pub defaults: UiDefaults,
}

fn default_host() -> String {
    "127.0.0.1".into()
}

fn default_port() -> u16 {
    8050
}

impl AppConfig {
    pub fn load(path: &Path) -> Result<Self, ServiceError> {
        let mut config: AppConfig = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if config.bundle.is_relative() {
            config.bundle = base.join(&config.bundle);
        }
        if let Some(dir) = &config.static_dir {
            if dir.is_relative() {
                config.static_dir = Some(base.join(dir));
            }
        }
        if !(0.0..=1.0).contains(&config.defaults.lambda) {
            return Err(ServiceError::SchemaViolation {
                file: path.to_path_buf(),
                reason: format!("defaults.lambda = {} is outside [0, 1]", config.defaults.lambda),
            });
        }
        Ok(config)
    }
}

/// Read and deserialize a JSON file, reporting the offending field path.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, ServiceError> {
    let bytes = std::fs::read(path).map_err(|source| ServiceError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_json(&bytes, path)
}

pub fn parse_json<T: DeserializeOwned>(bytes: &[u8], path: &Path) -> Result<T, ServiceError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(de).map_err(|e| ServiceError::SchemaViolation {
        file: path.to_path_buf(),
        reason: if e.path().to_string() == "." {
            e.inner().to_string()
        } else {
            format!("at `{}`: {}", e.path(), e.inner())
        },
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("bundle types serialize");
    out.push(b'\n');
    out
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ServiceError> {
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    std::fs::write(path, to_json_bytes(value)).map_err(|source| ServiceError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn create_dir(path: &Path) -> Result<(), ServiceError> {
    std::fs::create_dir_all(path).map_err(|source| ServiceError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> ServiceError {
    let path = path.into();
    move |source| ServiceError::Io { path, source }
}
