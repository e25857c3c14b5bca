use serde::{Deserialize, Serialize};

/// Tokens that end in a period without ending a sentence (compared lowercase,
/// without the trailing period).
pub const ABBREVIATIONS: &[&str] = &[
    "art", "approx", "cf", "co", "corp", "dept", "dr", "e.g", "eg", "etc", "eu", "fig", "i.e", "ie", "inc", "jr",
    "ltd", "mr", "mrs", "ms", "no", "nr", "p", "para", "pp", "prof", "sec", "sr", "st", "u.s", "vol", "vs",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub index: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SentenceSet {
    pub doc_id: Option<String>,
    pub section_id: Option<String>,
    pub sentences: Vec<Sentence>,
}

impl SentenceSet {
    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.sentences.iter().map(|s| s.text.as_str()).collect()
    }
}

pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

fn is_guarded(preceding: &str) -> bool {
    let word = preceding
        .rsplit(char::is_whitespace)
        .next()
        .unwrap_or("")
        .trim_start_matches(['(', '"', '\'', '[']);
    let lower = word.to_lowercase();
    if lower.chars().count() == 1 && lower.chars().all(char::is_alphabetic) {
        return true;
    }
    ABBREVIATIONS.contains(&lower.as_str())
}

/// Rule-based split on `.`, `!` and `?` followed by whitespace or end of text.
/// A period after a guarded abbreviation or a single-letter initial does not end a sentence.
pub fn split_sentences(text: &str) -> SentenceSet {
    let mut sentences = Vec::new();
    let mut start = 0;
    let mut iter = text.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        // absorb runs like "?!" or "..." and closing quotes/brackets
        let mut end = i + c.len_utf8();
        while let Some(&(j, next)) = iter.peek() {
            if matches!(next, '.' | '!' | '?' | '"' | '\'' | ')' | ']' | '”' | '’') {
                end = j + next.len_utf8();
                iter.next();
            } else {
                break;
            }
        }
        let at_boundary = iter.peek().is_none_or(|&(_, next)| next.is_whitespace());
        if !at_boundary {
            continue;
        }
        if c == '.' && is_guarded(&text[start..i]) {
            continue;
        }
        push_sentence(&mut sentences, &text[start..end]);
        start = end;
    }
    push_sentence(&mut sentences, &text[start..]);
    SentenceSet {
        doc_id: None,
        section_id: None,
        sentences,
    }
}

fn push_sentence(out: &mut Vec<Sentence>, raw: &str) {
    let text = raw.split_whitespace().collect::<Vec<_>>().join(" ");
    if !text.is_empty() {
        out.push(Sentence { index: out.len(), text });
    }
}
