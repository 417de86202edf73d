//! Text normalization: sentence split, tokenization, stopword removal and
//! Porter stemming.

pub mod porter;

use std::collections::HashSet;
use std::ops::Deref;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub use porter::stem;

const STOPWORDS_EN: &str = include_str!("../../data/stopwords_en.txt");

/// Version tag of the bundled stopword list.
pub const STOPWORD_LIST_VERSION: u32 = 1;

fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS_EN
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

pub fn is_stopword(token: &str) -> bool {
    stopwords().contains(token)
}

/// Ordered list of normalized terms.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TermList(Vec<String>);

impl TermList {
    pub fn into_inner(self) -> Vec<String> {
        self.0
    }
}

impl Deref for TermList {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl From<TermList> for Vec<String> {
    fn from(t: TermList) -> Self {
        t.0
    }
}

/// Splits on sentence terminators followed by whitespace. Unigram statistics
/// do not depend on this, but the pipeline keeps the stage.
pub fn sentences(text: &str) -> impl Iterator<Item = &str> {
    let mut rest = text;
    std::iter::from_fn(move || {
        if rest.is_empty() {
            return None;
        }
        let bytes = rest.as_bytes();
        let mut end = rest.len();
        for (i, &b) in bytes.iter().enumerate() {
            if matches!(b, b'.' | b'!' | b'?') && bytes.get(i + 1).is_some_and(|n| n.is_ascii_whitespace()) {
                end = i + 1;
                break;
            }
        }
        let (head, tail) = rest.split_at(end);
        rest = tail;
        Some(head)
    })
}

/// Lowercased alphanumeric runs.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// Full normalization pipeline. Stopwords are checked both before and after
/// stemming so no output term is itself a stopword.
pub fn preprocess(text: &str) -> TermList {
    let mut terms = Vec::new();
    for sentence in sentences(text) {
        for token in tokenize(sentence) {
            if is_stopword(&token) {
                continue;
            }
            let stemmed = stem(&token);
            if !stemmed.is_empty() && !is_stopword(&stemmed) {
                terms.push(stemmed);
            }
        }
    }
    TermList(terms)
}
