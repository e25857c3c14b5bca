//! The on-disk analysis bundle consumed by the server.
//!
//! ```text
//! manifest.json
//! sections/<id>/model.json
//!              /distances.json
//!              /clusters/<algo>.json
//!              /mapping/<method>.json
//!              /terms.json
//!              /summaries.json
//!              /correlations.json
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{create_dir, io_err, parse_json, read_json, write_json};
use super::ServiceError;
use crate::analysis::{
    ClusterParams, ClusterResult, CorrelationMatrix, CorrelationMethod, DistanceMatrix, Embedding2D, ManovaReport,
    MappingMethod, SalientTerm, TermRanking,
};
use crate::corpus::DocumentMeta;
use crate::summarize::SectionSummary;
use crate::topics::{SelectionReport, TopicModel};

pub const BUNDLE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionEntry {
    pub id: String,
    pub k: usize,
    pub labels: Vec<String>,
    pub n_docs: usize,
    /// Variant keys per clustering algorithm.
    pub clusters: BTreeMap<String, Vec<String>>,
    pub mappings: Vec<MappingMethod>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleManifest {
    pub version: u32,
    /// Seconds since the Unix epoch (`SOURCE_DATE_EPOCH` when set).
    pub created_unix: u64,
    pub documents: Vec<DocumentMeta>,
    pub section_ids: Vec<String>,
    pub covariate_names: Vec<String>,
    /// Every entity id is an ISO 3166-1 alpha-2 code.
    pub geo: bool,
    pub sections: Vec<SectionEntry>,
    /// Pipeline configuration the bundle was produced with.
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManovaEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<ManovaReport>,
    /// Why no report exists (too few groups, singleton groups).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterVariant {
    pub key: String,
    pub result: ClusterResult,
    pub manova: ManovaEntry,
}

/// Contents of `clusters/<algo>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSet {
    pub algo: String,
    pub variants: Vec<ClusterVariant>,
}

/// Contents of `terms.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionTerms {
    pub default_lambda: f64,
    pub top_n: usize,
    /// Token-weighted topic prevalence p(t).
    pub topic_prevalence: Vec<f64>,
    /// Ranking at `default_lambda`.
    pub ranking: TermRanking,
    pub saliency: Vec<SalientTerm>,
    /// Topics placed by classical MDS over topic-topic JSD; ids are topic indices.
    pub intertopic: Embedding2D,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEntry {
    pub method: CorrelationMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<CorrelationMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionBundle {
    pub model: TopicModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection: Option<SelectionReport>,
    pub distances: DistanceMatrix,
    pub clusters: BTreeMap<String, ClusterSet>,
    pub mappings: BTreeMap<MappingMethod, Embedding2D>,
    pub terms: SectionTerms,
    /// Keyed by doc_id.
    pub summaries: BTreeMap<String, SectionSummary>,
    pub correlations: Vec<CorrelationEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisBundle {
    pub manifest: BundleManifest,
    pub sections: BTreeMap<String, SectionBundle>,
}

/// Variant key stored in the manifest and accepted by the API.
pub fn variant_key(params: &ClusterParams) -> String {
    let metric = |m: &crate::analysis::Metric| {
        serde_json::to_value(m)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default()
    };
    match params {
        ClusterParams::Hierarchical { linkage, k, metric: m } => {
            let linkage = serde_json::to_value(linkage)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default();
            format!("k{k}-{linkage}-{}", metric(m))
        }
        ClusterParams::Kmeans {
            k,
            seed,
            restarts,
            space,
        } => {
            let space = serde_json::to_value(space)
                .ok()
                .and_then(|v| v.as_str().map(str::to_string))
                .unwrap_or_default();
            format!("k{k}-seed{seed}-r{restarts}-{space}")
        }
        ClusterParams::Hdbscan {
            min_cluster_size,
            min_samples,
            metric: m,
        } => format!("mcs{min_cluster_size}-ms{min_samples}-{}", metric(m)),
    }
}

/// True when `id` looks like an ISO 3166-1 alpha-2 code.
pub fn is_iso_alpha2(id: &str) -> bool {
    id.len() == 2 && id.bytes().all(|b| b.is_ascii_uppercase())
}

impl AnalysisBundle {
    /// Every cross-reference resolves: section ids, doc ids, topic counts, variant lists.
    pub fn check_references(&self) -> Result<(), ServiceError> {
        let dangling = |what: String| Err(ServiceError::DanglingReference(what));
        let docs: BTreeSet<&str> = self.manifest.documents.iter().map(|d| d.doc_id.as_str()).collect();
        let listed: BTreeSet<&str> = self.manifest.section_ids.iter().map(String::as_str).collect();
        let stored: BTreeSet<&str> = self.sections.keys().map(String::as_str).collect();
        if let Some(s) = listed.symmetric_difference(&stored).next() {
            return dangling(format!("section '{s}' is not both listed and stored"));
        }
        if self.manifest.sections.len() != self.sections.len()
            || self.manifest.sections.iter().any(|e| !stored.contains(e.id.as_str()))
        {
            return dangling("manifest section entries do not match stored sections".into());
        }
        for entry in &self.manifest.sections {
            let s = &self.sections[&entry.id];
            let sid = &entry.id;
            let model = &s.model;
            if let Some(d) = model.doc_ids.iter().find(|d| !docs.contains(d.as_str())) {
                return dangling(format!("section '{sid}' model references unknown doc_id '{d}'"));
            }
            if entry.k != model.k || entry.labels != model.labels || entry.n_docs != model.n_docs() {
                return dangling(format!("section '{sid}' manifest entry disagrees with its model"));
            }
            if s.distances.ids != model.doc_ids {
                return dangling(format!("section '{sid}' distance ids differ from model doc_ids"));
            }
            let listed_algos: BTreeSet<&String> = entry.clusters.keys().collect();
            let stored_algos: BTreeSet<&String> = s.clusters.keys().collect();
            if listed_algos != stored_algos {
                return dangling(format!("section '{sid}' cluster algorithms differ from manifest"));
            }
            for (algo, set) in &s.clusters {
                let keys: Vec<String> = set.variants.iter().map(|v| v.key.clone()).collect();
                if &keys != entry.clusters.get(algo).expect("checked above") || &set.algo != algo {
                    return dangling(format!("section '{sid}' clusters/{algo} variants differ from manifest"));
                }
                for v in &set.variants {
                    if v.result.labels.len() != model.n_docs() || v.result.params.algo_name() != algo {
                        return dangling(format!(
                            "section '{sid}' clusters/{algo} variant '{}' does not match the model",
                            v.key
                        ));
                    }
                }
            }
            let methods: Vec<MappingMethod> = s.mappings.keys().copied().collect();
            let mut listed_methods = entry.mappings.clone();
            listed_methods.sort();
            if methods != listed_methods {
                return dangling(format!("section '{sid}' mappings differ from manifest"));
            }
            for (m, e) in &s.mappings {
                if e.ids != model.doc_ids || e.method != *m {
                    return dangling(format!(
                        "section '{sid}' mapping '{}' ids differ from model doc_ids",
                        m.name()
                    ));
                }
            }
            let topic_ids: Vec<String> = (0..model.k).map(|t| t.to_string()).collect();
            if s.terms.intertopic.ids != topic_ids || s.terms.ranking.topics.len() != model.k {
                return dangling(format!("section '{sid}' terms do not cover topics 0..{}", model.k));
            }
            if s.terms.topic_prevalence.len() != model.k {
                return dangling(format!("section '{sid}' topic prevalence has wrong length"));
            }
            for (doc, summary) in &s.summaries {
                if !docs.contains(doc.as_str()) || &summary.doc_id != doc || &summary.section_id != sid {
                    return dangling(format!("section '{sid}' summary keyed '{doc}' does not resolve"));
                }
            }
            for c in &s.correlations {
                if let Some(m) = &c.matrix {
                    if m.topics.len() != model.k {
                        return dangling(format!("section '{sid}' correlations have {} topics", m.topics.len()));
                    }
                    if let Some(name) = m.covariates.iter().find(|n| !self.manifest.covariate_names.contains(n)) {
                        return dangling(format!(
                            "section '{sid}' correlations reference unknown covariate '{name}'"
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn section(&self, id: &str) -> Option<&SectionBundle> {
        self.sections.get(id)
    }
}

fn section_dir(root: &Path, id: &str) -> std::path::PathBuf {
    root.join("sections").join(id)
}

pub fn save_bundle(bundle: &AnalysisBundle, path: &Path) -> Result<(), ServiceError> {
    bundle.check_references()?;
    // a previous bundle in the same place is replaced, never merged
    let sections_root = path.join("sections");
    if path.join("manifest.json").is_file() && sections_root.is_dir() {
        std::fs::remove_dir_all(&sections_root).map_err(io_err(&sections_root))?;
    }
    create_dir(path)?;
    for (id, s) in &bundle.sections {
        let dir = section_dir(path, id);
        write_json(&dir.join("model.json"), &s.model)?;
        if let Some(sel) = &s.selection {
            write_json(&dir.join("selection.json"), sel)?;
        }
        write_json(&dir.join("distances.json"), &s.distances)?;
        for (algo, set) in &s.clusters {
            write_json(&dir.join("clusters").join(format!("{algo}.json")), set)?;
        }
        for (method, e) in &s.mappings {
            write_json(&dir.join("mapping").join(format!("{}.json", method.name())), e)?;
        }
        write_json(&dir.join("terms.json"), &s.terms)?;
        write_json(&dir.join("summaries.json"), &s.summaries)?;
        write_json(&dir.join("correlations.json"), &s.correlations)?;
    }
    // manifest last, so a partially written bundle never looks complete
    write_json(&path.join("manifest.json"), &bundle.manifest)
}

pub fn load_bundle(path: &Path) -> Result<AnalysisBundle, ServiceError> {
    let manifest_path = path.join("manifest.json");
    let bytes = std::fs::read(&manifest_path).map_err(io_err(&manifest_path))?;
    #[derive(Deserialize)]
    struct VersionOnly {
        version: u32,
    }
    let probe: VersionOnly = parse_json(&bytes, &manifest_path)?;
    if probe.version != BUNDLE_VERSION {
        return Err(ServiceError::VersionMismatch {
            found: probe.version,
            expected: BUNDLE_VERSION,
        });
    }
    let manifest: BundleManifest = parse_json(&bytes, &manifest_path)?;
    let mut sections = BTreeMap::new();
    for entry in &manifest.sections {
        let dir = section_dir(path, &entry.id);
        let selection_path = dir.join("selection.json");
        let selection = if selection_path.is_file() {
            Some(read_json(&selection_path)?)
        } else {
            None
        };
        let mut clusters = BTreeMap::new();
        for algo in entry.clusters.keys() {
            clusters.insert(
                algo.clone(),
                read_json(&dir.join("clusters").join(format!("{algo}.json")))?,
            );
        }
        let mut mappings = BTreeMap::new();
        for method in &entry.mappings {
            mappings.insert(
                *method,
                read_json(&dir.join("mapping").join(format!("{}.json", method.name())))?,
            );
        }
        sections.insert(
            entry.id.clone(),
            SectionBundle {
                model: read_json(&dir.join("model.json"))?,
                selection,
                distances: read_json(&dir.join("distances.json"))?,
                clusters,
                mappings,
                terms: read_json(&dir.join("terms.json"))?,
                summaries: read_json(&dir.join("summaries.json"))?,
                correlations: read_json(&dir.join("correlations.json"))?,
            },
        );
    }
    let bundle = AnalysisBundle { manifest, sections };
    bundle.check_references()?;
    for (id, s) in &bundle.sections {
        s.model.validate().map_err(|e| ServiceError::SchemaViolation {
            file: section_dir(path, id).join("model.json"),
            reason: e.to_string(),
        })?;
    }
    Ok(bundle)
}
