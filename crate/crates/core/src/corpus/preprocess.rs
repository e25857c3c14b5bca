use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::stem::porter_stem;

/// Bundled English stopword list.
pub const DEFAULT_STOPWORDS: &[&str] = &[
    "a",
    "about",
    "above",
    "after",
    "again",
    "against",
    "all",
    "also",
    "am",
    "an",
    "and",
    "any",
    "are",
    "as",
    "at",
    "be",
    "because",
    "been",
    "before",
    "being",
    "below",
    "between",
    "both",
    "but",
    "by",
    "can",
    "could",
    "did",
    "do",
    "does",
    "doing",
    "down",
    "during",
    "each",
    "either",
    "etc",
    "few",
    "for",
    "from",
    "further",
    "had",
    "has",
    "have",
    "having",
    "he",
    "her",
    "here",
    "hers",
    "herself",
    "him",
    "himself",
    "his",
    "how",
    "however",
    "i",
    "if",
    "in",
    "into",
    "is",
    "it",
    "its",
    "itself",
    "just",
    "may",
    "me",
    "might",
    "more",
    "most",
    "must",
    "my",
    "myself",
    "no",
    "nor",
    "not",
    "now",
    "of",
    "off",
    "on",
    "once",
    "only",
    "or",
    "other",
    "our",
    "ours",
    "ourselves",
    "out",
    "over",
    "own",
    "per",
    "same",
    "shall",
    "she",
    "should",
    "so",
    "some",
    "such",
    "than",
    "that",
    "the",
    "their",
    "theirs",
    "them",
    "themselves",
    "then",
    "there",
    "these",
    "they",
    "this",
    "those",
    "through",
    "thus",
    "to",
    "too",
    "under",
    "until",
    "up",
    "upon",
    "us",
    "very",
    "via",
    "was",
    "we",
    "were",
    "what",
    "when",
    "where",
    "whether",
    "which",
    "while",
    "who",
    "whom",
    "why",
    "will",
    "with",
    "within",
    "without",
    "would",
    "yet",
    "you",
    "your",
    "yours",
    "yourself",
    "yourselves",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessOptions {
    pub stopwords: BTreeSet<String>,
    pub min_token_len: usize,
    pub stemming: bool,
    /// Optional token→lemma overrides, consulted before the stemmer.
    #[serde(default)]
    pub lemmas: BTreeMap<String, String>,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        Self {
            stopwords: DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect(),
            min_token_len: 3,
            stemming: true,
            lemmas: BTreeMap::new(),
        }
    }
}

impl PreprocessOptions {
    pub fn with_extra_stopwords<I, S>(mut self, extra: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.stopwords
            .extend(extra.into_iter().map(|s| s.as_ref().to_lowercase()));
        self
    }
}

/// Split into lowercase alphabetic runs; everything else is a separator.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphabetic())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

pub fn normalize_token(token: &str, options: &PreprocessOptions) -> Option<String> {
    if options.stopwords.contains(token) {
        return None;
    }
    let normalized = match options.lemmas.get(token) {
        Some(lemma) => lemma.clone(),
        None if options.stemming => porter_stem(token),
        None => token.to_string(),
    };
    if normalized.chars().count() < options.min_token_len || options.stopwords.contains(&normalized) {
        return None;
    }
    Some(normalized)
}

pub fn preprocess(raw_text: &str, options: &PreprocessOptions) -> Vec<String> {
    tokenize(raw_text)
        .iter()
        .filter_map(|t| normalize_token(t, options))
        .collect()
}
