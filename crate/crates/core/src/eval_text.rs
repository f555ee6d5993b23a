//! Character and word error rates from a Levenshtein alignment.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct EditCounts {
    pub substitutions: usize,
    pub deletions: usize,
    pub insertions: usize,
    pub reference_length: usize,
}

impl EditCounts {
    pub fn errors(&self) -> usize {
        self.substitutions + self.deletions + self.insertions
    }

    pub fn rate(&self) -> f64 {
        self.errors() as f64 / self.reference_length as f64
    }
}

impl std::ops::Add for EditCounts {
    type Output = EditCounts;
    fn add(self, o: EditCounts) -> EditCounts {
        EditCounts {
            substitutions: self.substitutions + o.substitutions,
            deletions: self.deletions + o.deletions,
            insertions: self.insertions + o.insertions,
            reference_length: self.reference_length + o.reference_length,
        }
    }
}

/// Unit-cost alignment counts.
///
/// The backtrace prefers a diagonal step (match or substitution), then a
/// deletion, then an insertion, so among minimal alignments substitutions win.
pub fn edit_counts<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> Result<EditCounts> {
    if reference.is_empty() {
        return Err(Error::invalid("reference is empty"));
    }
    let (n, m) = (reference.len(), hypothesis.len());
    let w = m + 1;
    let mut dp = vec![0usize; (n + 1) * w];
    for i in 0..=n {
        dp[i * w] = i;
    }
    for j in 0..=m {
        dp[j] = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = dp[(i - 1) * w + j - 1] + usize::from(reference[i - 1] != hypothesis[j - 1]);
            let del = dp[(i - 1) * w + j] + 1;
            let ins = dp[i * w + j - 1] + 1;
            dp[i * w + j] = sub.min(del).min(ins);
        }
    }

    let mut c = EditCounts {
        reference_length: n,
        ..EditCounts::default()
    };
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = dp[i * w + j];
        if i > 0 && j > 0 {
            let mismatch = reference[i - 1] != hypothesis[j - 1];
            if dp[(i - 1) * w + j - 1] + usize::from(mismatch) == here {
                c.substitutions += usize::from(mismatch);
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && dp[(i - 1) * w + j] + 1 == here {
            c.deletions += 1;
            i -= 1;
        } else {
            c.insertions += 1;
            j -= 1;
        }
    }
    Ok(c)
}

/// Optional normalization applied to both sides before scoring.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Normalization {
    pub lowercase: bool,
    pub strip_punctuation: bool,
    pub collapse_whitespace: bool,
}

impl Normalization {
    pub fn apply(&self, s: &str) -> String {
        let mut out: String = s
            .chars()
            .filter(|c| !(self.strip_punctuation && c.is_ascii_punctuation()))
            .collect();
        if self.lowercase {
            out = out.to_lowercase();
        }
        if self.collapse_whitespace {
            out = out.split_whitespace().collect::<Vec<_>>().join(" ");
        }
        out
    }
}

pub fn char_counts(reference: &str, hypothesis: &str) -> Result<EditCounts> {
    let r: Vec<char> = reference.chars().collect();
    let h: Vec<char> = hypothesis.chars().collect();
    edit_counts(&r, &h).map_err(|_| Error::invalid("CER reference is empty"))
}

pub fn word_counts(reference: &str, hypothesis: &str) -> Result<EditCounts> {
    let r: Vec<&str> = reference.split_whitespace().collect();
    let h: Vec<&str> = hypothesis.split_whitespace().collect();
    edit_counts(&r, &h).map_err(|_| Error::invalid("WER reference has no words"))
}

/// (S + D + I) / N over Unicode scalar values.
pub fn cer(reference: &str, hypothesis: &str) -> Result<f64> {
    Ok(char_counts(reference, hypothesis)?.rate())
}

/// (S + D + I) / M over whitespace-delimited words.
pub fn wer(reference: &str, hypothesis: &str) -> Result<f64> {
    Ok(word_counts(reference, hypothesis)?.rate())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineScore {
    pub line: usize,
    pub cer: f64,
    pub wer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OcrReport {
    pub pairs: usize,
    /// Σ errors / Σ reference length.
    pub cer: f64,
    pub wer: f64,
    /// Unweighted mean of per-line rates.
    pub macro_cer: f64,
    pub macro_wer: f64,
    pub char_counts: EditCounts,
    pub word_counts: EditCounts,
    pub lines: Vec<LineScore>,
}

pub fn score_pairs(pairs: &[(String, String)], norm: Normalization) -> Result<OcrReport> {
    if pairs.is_empty() {
        return Err(Error::invalid("no reference/hypothesis pairs"));
    }
    let mut chars = EditCounts::default();
    let mut words = EditCounts::default();
    let mut lines = Vec::with_capacity(pairs.len());
    for (k, (r, h)) in pairs.iter().enumerate() {
        let (r, h) = (norm.apply(r), norm.apply(h));
        let line = k + 1;
        let c = char_counts(&r, &h).map_err(|e| Error::invalid(format!("pair {line}: {e}")))?;
        let w = word_counts(&r, &h).map_err(|e| Error::invalid(format!("pair {line}: {e}")))?;
        lines.push(LineScore {
            line,
            cer: c.rate(),
            wer: w.rate(),
        });
        chars = chars + c;
        words = words + w;
    }
    let n = lines.len() as f64;
    Ok(OcrReport {
        pairs: lines.len(),
        cer: chars.rate(),
        wer: words.rate(),
        macro_cer: lines.iter().map(|l| l.cer).sum::<f64>() / n,
        macro_wer: lines.iter().map(|l| l.wer).sum::<f64>() / n,
        char_counts: chars,
        word_counts: words,
        lines,
    })
}

/// Reads `reference<TAB>hypothesis` lines. Blank lines are skipped.
pub fn read_pairs_tsv(path: &Path) -> Result<Vec<(String, String)>> {
    let text = crate::io::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        let (r, h) = line.split_once('\t').ok_or_else(|| {
            Error::parse(
                format!("{}:{}", path.display(), i + 1),
                "expected reference<TAB>hypothesis",
            )
        })?;
        out.push((r.to_string(), h.to_string()));
    }
    Ok(out)
}
