use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::sections::SectionSpec;
use super::CorpusError;

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    version: u32,
    language: String,
    #[serde(default)]
    stopwords_extra: Vec<String>,
    #[serde(default)]
    lemmas: BTreeMap<String, String>,
    structure: SectionSpec,
    documents: Vec<RawDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    doc_id: String,
    entity_id: String,
    text: PathBuf,
    #[serde(default)]
    covariates: BTreeMap<String, Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestDocument {
    pub doc_id: String,
    pub entity_id: String,
    /// Resolved against the manifest's directory.
    pub text_path: PathBuf,
    pub covariates: BTreeMap<String, Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub documents: Vec<ManifestDocument>,
    pub structure: SectionSpec,
    pub language: String,
    pub stopwords_extra: Vec<String>,
    pub lemmas: BTreeMap<String, String>,
}

impl CorpusManifest {
    pub fn doc_ids(&self) -> Vec<String> {
        self.documents.iter().map(|d| d.doc_id.clone()).collect()
    }

    pub fn covariate_names(&self) -> Vec<String> {
        self.documents
            .first()
            .map(|d| d.covariates.keys().cloned().collect())
            .unwrap_or_default()
    }

    pub fn read_text(&self, doc: &ManifestDocument) -> Result<String, CorpusError> {
        std::fs::read_to_string(&doc.text_path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => CorpusError::MissingFile(doc.text_path.clone()),
            _ => CorpusError::Io {
                path: doc.text_path.clone(),
                source: e,
            },
        })
    }
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<CorpusManifest, CorpusError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => CorpusError::MissingFile(path.to_path_buf()),
        _ => CorpusError::Io {
            path: path.to_path_buf(),
            source: e,
        },
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_manifest(&bytes, base)
}

pub fn parse_manifest(bytes: &[u8], base_dir: &Path) -> Result<CorpusManifest, CorpusError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let raw: RawManifest = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        CorpusError::schema(field, e.into_inner().to_string())
    })?;

    if raw.version != MANIFEST_VERSION {
        return Err(CorpusError::schema(
            "version",
            format!(
                "unsupported manifest version {} (expected {MANIFEST_VERSION})",
                raw.version
            ),
        ));
    }
    if raw.documents.is_empty() {
        return Err(CorpusError::schema("documents", "must not be empty"));
    }
    raw.structure.compile()?;

    let mut seen = HashSet::new();
    let mut documents = Vec::with_capacity(raw.documents.len());
    let mut covariate_keys: Option<BTreeSet<String>> = None;
    for (i, doc) in raw.documents.into_iter().enumerate() {
        if doc.doc_id.is_empty() {
            return Err(CorpusError::schema(
                format!("documents[{i}].doc_id"),
                "must not be empty",
            ));
        }
        if !seen.insert(doc.doc_id.clone()) {
            return Err(CorpusError::DuplicateDocId(doc.doc_id));
        }
        let keys: BTreeSet<String> = doc.covariates.keys().cloned().collect();
        match &covariate_keys {
            None => covariate_keys = Some(keys),
            Some(expected) if *expected != keys => {
                return Err(CorpusError::schema(
                    format!("documents[{i}].covariates"),
                    format!("keys {keys:?} differ from the first document's {expected:?}"),
                ));
            }
            Some(_) => {}
        }
        for (name, value) in &doc.covariates {
            if matches!(value, Some(v) if !v.is_finite()) {
                return Err(CorpusError::schema(
                    format!("documents[{i}].covariates.{name}"),
                    "must be a finite number or null",
                ));
            }
        }
        let text_path = base_dir.join(&doc.text);
        if !text_path.is_file() {
            return Err(CorpusError::MissingFile(text_path));
        }
        documents.push(ManifestDocument {
            doc_id: doc.doc_id,
            entity_id: doc.entity_id,
            text_path,
            covariates: doc.covariates,
        });
    }

    Ok(CorpusManifest {
        documents,
        structure: raw.structure,
        language: raw.language,
        stopwords_extra: raw.stopwords_extra,
        lemmas: raw.lemmas,
    })
}
