//! Text ingestion: manifest loading, section splitting, normalization,
//! vocabulary construction and bag-of-words counts.

mod bow;
mod manifest;
mod preprocess;
mod sections;
pub mod stem;
mod vocab;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use bow::{to_bow, BowMatrix, BowRow};
pub use manifest::{load_manifest, parse_manifest, CorpusManifest, ManifestDocument, MANIFEST_VERSION};
pub use preprocess::{normalize_token, preprocess, tokenize, PreprocessOptions, DEFAULT_STOPWORDS};
pub use sections::{
    split_sections, CompiledSectionSpec, Section, SectionHeader, SectionOffset, SectionSpec, SectionSplit,
};
pub use vocab::{build_vocabulary, Vocabulary, DEFAULT_MAX_DF, DEFAULT_MIN_DF};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("missing file: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("schema violation at `{field}`: {reason}")]
    SchemaViolation { field: String, reason: String },
    #[error("duplicate doc_id {0:?}")]
    DuplicateDocId(String),
    #[error("no section header matched in document {doc_id:?}")]
    NoSectionMatched { doc_id: String },
    #[error("vocabulary is empty after filtering (min_df={min_df}, max_df={max_df})")]
    EmptyVocabulary { min_df: usize, max_df: f64 },
    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CorpusError {
    pub(crate) fn schema(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CorpusError::SchemaViolation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusOptions {
    pub min_token_len: usize,
    pub stemming: bool,
    pub min_df: usize,
    pub max_df: f64,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        Self {
            min_token_len: 3,
            stemming: true,
            min_df: DEFAULT_MIN_DF,
            max_df: DEFAULT_MAX_DF,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentMeta {
    pub doc_id: String,
    pub entity_id: String,
    pub covariates: BTreeMap<String, Option<f64>>,
}

/// Everything later stages need from ingestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub language: String,
    pub documents: Vec<DocumentMeta>,
    /// Section ids in structure order.
    pub section_ids: Vec<String>,
    pub covariate_names: Vec<String>,
    pub preprocess: PreprocessOptions,
    /// Sections with raw text and tokens, grouped by section id.
    pub sections: BTreeMap<String, Vec<Section>>,
    pub bow: BTreeMap<String, BowMatrix>,
}

impl Corpus {
    pub fn section(&self, section_id: &str, doc_id: &str) -> Option<&Section> {
        self.sections.get(section_id)?.iter().find(|s| s.doc_id == doc_id)
    }
}

pub fn build_corpus(manifest: &CorpusManifest, options: &CorpusOptions) -> Result<Corpus, CorpusError> {
    let compiled = manifest.structure.compile()?;
    let preprocess_options = PreprocessOptions {
        min_token_len: options.min_token_len,
        stemming: options.stemming,
        lemmas: manifest.lemmas.clone(),
        ..PreprocessOptions::default()
    }
    .with_extra_stopwords(&manifest.stopwords_extra);

    let section_ids = manifest.structure.section_ids();
    let mut by_section: BTreeMap<String, Vec<Section>> = BTreeMap::new();
    for doc in &manifest.documents {
        let text = manifest.read_text(doc)?;
        let split = split_sections(&doc.doc_id, &text, &compiled)?;
        for mut section in split.sections {
            section.tokens = preprocess(section.body(), &preprocess_options);
            by_section.entry(section.section_id.clone()).or_default().push(section);
        }
    }

    let mut bow = BTreeMap::new();
    for (section_id, sections) in &by_section {
        let streams: Vec<&[String]> = sections.iter().map(|s| s.tokens.as_slice()).collect();
        let vocab = build_vocabulary(&streams, options.min_df, options.max_df)?;
        // Documents with no in-vocabulary token cannot be modeled for this section.
        let (doc_ids, rows): (Vec<String>, Vec<BowRow>) = sections
            .iter()
            .map(|s| (s.doc_id.clone(), to_bow(&s.tokens, &vocab)))
            .filter(|(_, row)| !row.is_empty())
            .unzip();
        bow.insert(
            section_id.clone(),
            BowMatrix {
                section_id: section_id.clone(),
                doc_ids,
                vocab,
                rows,
            },
        );
    }

    Ok(Corpus {
        language: manifest.language.clone(),
        documents: manifest
            .documents
            .iter()
            .map(|d| DocumentMeta {
                doc_id: d.doc_id.clone(),
                entity_id: d.entity_id.clone(),
                covariates: d.covariates.clone(),
            })
            .collect(),
        section_ids: section_ids
            .into_iter()
            .filter(|id| by_section.contains_key(id))
            .collect(),
        covariate_names: manifest.covariate_names(),
        preprocess: preprocess_options,
        sections: by_section,
        bow,
    })
}
