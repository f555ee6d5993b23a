//! Lowercasing tokenizer with stopword removal and n-gram formation.

use std::collections::HashSet;
use std::path::Path;

use crate::error::Result;
use crate::io;

const DEFAULT_STOPWORDS: &str = include_str!("../../data/stopwords_it.txt");

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stopwords {
    words: HashSet<String>,
}

impl Stopwords {
    /// One term per line; blank lines and `#` comments ignored; lowercased.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        Stopwords { words }
    }

    /// Italian function words, legal boilerplate terms and the anonymization tags.
    pub fn italian() -> Self {
        Self::parse(DEFAULT_STOPWORDS)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Ok(Self::parse(&io::read_to_string(path)?))
    }

    pub fn from_words<I: IntoIterator<Item = S>, S: AsRef<str>>(words: I) -> Self {
        Stopwords {
            words: words.into_iter().map(|w| w.as_ref().to_lowercase()).collect(),
        }
    }

    pub fn contains(&self, w: &str) -> bool {
        self.words.contains(w)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Removes `<TAG>` placeholders (uppercase letters and underscores inside angle brackets).
fn strip_tags(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find('<') {
        out.push_str(&rest[..start]);
        let after = &rest[start + 1..];
        let end = after.find(|c: char| !(c.is_uppercase() || c == '_'));
        match end {
            Some(e) if e > 0 && after[e..].starts_with('>') => {
                out.push(' ');
                rest = &after[e + 1..];
            }
            _ => {
                out.push('<');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Lowercase runs of letters/digits, at least two characters, stopwords removed.
pub fn tokenize(text: &str, stopwords: &Stopwords) -> Vec<String> {
    strip_tags(text)
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2 && !stopwords.contains(t))
        .map(str::to_owned)
        .collect()
}

/// All n-grams with `lo <= n <= hi`, tokens joined by one space, in order of
/// first token position then length.
pub fn ngrams(tokens: &[String], (lo, hi): (usize, usize)) -> Vec<String> {
    let mut out = Vec::new();
    for i in 0..tokens.len() {
        for n in lo.max(1)..=hi {
            if i + n > tokens.len() {
                break;
            }
            out.push(tokens[i..i + n].join(" "));
        }
    }
    out
}
