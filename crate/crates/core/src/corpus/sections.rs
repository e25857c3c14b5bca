use std::collections::{BTreeMap, HashSet};

use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};

use super::CorpusError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionHeader {
    pub id: String,
    pub header_pattern: String,
}

/// How documents are cut into sections: ordered header patterns (matched in
/// multi-line mode, so `^` anchors at line starts) or explicit byte offsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SectionSpec {
    Headers {
        sections: Vec<SectionHeader>,
    },
    Offsets {
        offsets: BTreeMap<String, Vec<SectionOffset>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionOffset {
    pub id: String,
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Section {
    pub doc_id: String,
    pub section_id: String,
    /// Text from the header (inclusive) up to the next section start.
    pub raw_text: String,
    /// Byte length of the header match at the front of `raw_text`.
    pub header_len: usize,
    #[serde(default)]
    pub tokens: Vec<String>,
}

impl Section {
    pub fn body(&self) -> &str {
        &self.raw_text[self.header_len..]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectionSplit {
    pub preamble: String,
    pub sections: Vec<Section>,
}

impl SectionSplit {
    pub fn reassemble(&self) -> String {
        let mut out = self.preamble.clone();
        for s in &self.sections {
            out.push_str(&s.raw_text);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub enum CompiledSectionSpec {
    Headers(Vec<(String, Regex)>),
    Offsets(BTreeMap<String, Vec<SectionOffset>>),
}

impl SectionSpec {
    pub fn section_ids(&self) -> Vec<String> {
        match self {
            SectionSpec::Headers { sections } => sections.iter().map(|s| s.id.clone()).collect(),
            SectionSpec::Offsets { offsets } => {
                let mut ids: Vec<String> = Vec::new();
                for entries in offsets.values() {
                    for e in entries {
                        if !ids.contains(&e.id) {
                            ids.push(e.id.clone());
                        }
                    }
                }
                ids
            }
        }
    }

    pub fn compile(&self) -> Result<CompiledSectionSpec, CorpusError> {
        match self {
            SectionSpec::Headers { sections } => {
                if sections.is_empty() {
                    return Err(CorpusError::schema("structure.sections", "must not be empty"));
                }
                let mut seen = HashSet::new();
                let mut compiled = Vec::with_capacity(sections.len());
                for (i, s) in sections.iter().enumerate() {
                    if s.id.is_empty() {
                        return Err(CorpusError::schema(
                            format!("structure.sections[{i}].id"),
                            "must not be empty",
                        ));
                    }
                    if !seen.insert(s.id.as_str()) {
                        return Err(CorpusError::schema(
                            format!("structure.sections[{i}].id"),
                            format!("duplicate section id {:?}", s.id),
                        ));
                    }
                    let re = RegexBuilder::new(&s.header_pattern)
                        .multi_line(true)
                        .build()
                        .map_err(|e| {
                            CorpusError::schema(format!("structure.sections[{i}].header_pattern"), e.to_string())
                        })?;
                    compiled.push((s.id.clone(), re));
                }
                Ok(CompiledSectionSpec::Headers(compiled))
            }
            SectionSpec::Offsets { offsets } => {
                for (doc, entries) in offsets {
                    let mut seen = HashSet::new();
                    for (i, pair) in entries.windows(2).enumerate() {
                        if pair[1].offset <= pair[0].offset {
                            return Err(CorpusError::schema(
                                format!("structure.offsets.{doc}[{}]", i + 1),
                                "offsets must be strictly increasing",
                            ));
                        }
                    }
                    for e in entries {
                        if !seen.insert(e.id.as_str()) {
                            return Err(CorpusError::schema(
                                format!("structure.offsets.{doc}"),
                                format!("duplicate section id {:?}", e.id),
                            ));
                        }
                    }
                }
                Ok(CompiledSectionSpec::Offsets(offsets.clone()))
            }
        }
    }
}

/// Cut `text` into sections. Headers missing from the text produce no section.
pub fn split_sections(doc_id: &str, text: &str, spec: &CompiledSectionSpec) -> Result<SectionSplit, CorpusError> {
    // (section_id, start, header_len)
    let mut starts: Vec<(String, usize, usize)> = Vec::new();
    match spec {
        CompiledSectionSpec::Headers(headers) => {
            let mut pos = 0;
            for (id, re) in headers {
                if let Some(m) = re.find_at(text, pos) {
                    starts.push((id.clone(), m.start(), m.len()));
                    pos = m.end();
                }
            }
        }
        CompiledSectionSpec::Offsets(table) => {
            if let Some(entries) = table.get(doc_id) {
                for e in entries {
                    if e.offset > text.len() || !text.is_char_boundary(e.offset) {
                        return Err(CorpusError::schema(
                            format!("structure.offsets.{doc_id}"),
                            format!("offset {} is not a character boundary of the text", e.offset),
                        ));
                    }
                    starts.push((e.id.clone(), e.offset, 0));
                }
            }
        }
    }
    if starts.is_empty() {
        return Err(CorpusError::NoSectionMatched {
            doc_id: doc_id.to_string(),
        });
    }

    let preamble = text[..starts[0].1].to_string();
    let sections = starts
        .iter()
        .enumerate()
        .map(|(i, (id, start, header_len))| {
            let end = starts.get(i + 1).map_or(text.len(), |next| next.1);
            Section {
                doc_id: doc_id.to_string(),
                section_id: id.clone(),
                raw_text: text[*start..end].to_string(),
                header_len: *header_len,
                tokens: Vec::new(),
            }
        })
        .collect();
    Ok(SectionSplit { preamble, sections })
}
