//! Distances, clustering, significance tests, term rankings, correlations and
//! 2D mappings over fitted topic distributions.

pub mod agglomerative;
pub mod cluster;
pub mod correlation;
pub mod distance;
pub mod divergence;
pub mod hdbscan;
pub mod kmeans;
pub mod manova;
pub mod mds;
pub mod terms;
pub mod tsne;

pub use agglomerative::{agglomerative, cut_tree, linkage_tree, Linkage, Merge};
pub use cluster::{canonical_labels, count_clusters, ClusterParams, ClusterResult, NOISE};
pub use correlation::{correlation_matrix, CorrelationCell, CorrelationMatrix, CorrelationMethod};
pub use distance::{distance_matrix, DistanceMatrix, Metric};
pub use divergence::{hellinger, jensen_shannon, kl_divergence};
pub use hdbscan::{hdbscan, CondensedEdge, MstEdge};
pub use kmeans::{kmeans, KMeansSpace};
pub use manova::{manova, Fallback, ManovaReport};
pub use mds::{classical_mds, Embedding2D, MappingMethod};
pub use terms::{relevance, saliency, SalientTerm, TermRanking, TermScore, DEFAULT_LAMBDA};
pub use tsne::{tsne, TsneParams};

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("not a probability distribution: {0}")]
    NotADistribution(String),
    #[error("row {row}: {source}")]
    AtRow {
        row: usize,
        #[source]
        source: Box<AnalysisError>,
    },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("k = {k} is outside 1..={n}")]
    BadK { k: usize, n: usize },
    #[error("{n} points is fewer than min_cluster_size = {min_cluster_size}")]
    TooFewPoints { n: usize, min_cluster_size: usize },
    #[error("MANOVA needs at least 2 non-noise groups, found {0}")]
    TooFewGroups(usize),
    #[error("group {label} has {size} member(s), need at least 2")]
    GroupTooSmall { label: i64, size: usize },
    #[error("perplexity {perplexity} must be below n - 1 = {}", *n as f64 - 1.0)]
    PerplexityTooLarge { perplexity: f64, n: usize },
    #[error("topic '{topic}' vs covariate '{covariate}': only {n} complete pair(s), need 3")]
    InsufficientPairs { topic: String, covariate: String, n: usize },
}
