//! Vocabulary and per-cluster term counts.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::tokenize::ngrams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    /// Sorted alphabetically; the column index of a term is its position.
    pub terms: Vec<String>,
    pub index: HashMap<String, usize>,
    /// Number of non-noise segments containing the term.
    pub df: Vec<usize>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BagOfWords {
    pub vocab: Vocabulary,
    /// `n_clusters × vocab.len()` raw counts.
    pub cluster_tf: Vec<Vec<f64>>,
    /// Distinct vocabulary columns present in each segment (empty for noise).
    pub segment_terms: Vec<Vec<usize>>,
}

/// Counts n-grams of non-noise segments; terms in fewer than `min_df`
/// segments are pruned.
pub fn build_vocab(
    tokens: &[Vec<String>],
    labels: &[i64],
    ngram_range: (usize, usize),
    min_df: usize,
) -> Result<BagOfWords> {
    if tokens.len() != labels.len() {
        return Err(Error::invalid("token lists and labels differ in length"));
    }
    if ngram_range.0 == 0 || ngram_range.0 > ngram_range.1 {
        return Err(Error::invalid(format!("invalid ngram_range {ngram_range:?}")));
    }
    let n_clusters = labels.iter().copied().max().unwrap_or(-1) + 1;
    if n_clusters <= 0 {
        return Err(Error::invalid("no non-noise cluster to describe"));
    }
    let n_clusters = n_clusters as usize;

    let per_segment: Vec<Option<BTreeMap<String, usize>>> = tokens
        .iter()
        .zip(labels)
        .map(|(t, &l)| {
            (l >= 0).then(|| {
                let mut counts = BTreeMap::new();
                for g in ngrams(t, ngram_range) {
                    *counts.entry(g).or_insert(0) += 1;
                }
                counts
            })
        })
        .collect();

    let mut df: BTreeMap<&str, usize> = BTreeMap::new();
    for counts in per_segment.iter().flatten() {
        for term in counts.keys() {
            *df.entry(term.as_str()).or_insert(0) += 1;
        }
    }
    let kept: BTreeSet<&str> = df.iter().filter(|(_, &d)| d >= min_df).map(|(t, _)| *t).collect();
    if kept.is_empty() {
        return Err(Error::invalid(format!("vocabulary is empty after pruning with min_df = {min_df}")));
    }
    let terms: Vec<String> = kept.iter().map(|t| t.to_string()).collect();
    let index: HashMap<String, usize> = terms.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    let df_vec = terms.iter().map(|t| df[t.as_str()]).collect();

    let mut cluster_tf = vec![vec![0.0; terms.len()]; n_clusters];
    let mut segment_terms = vec![Vec::new(); tokens.len()];
    for (s, counts) in per_segment.iter().enumerate() {
        let Some(counts) = counts else { continue };
        let c = labels[s] as usize;
        for (term, &n) in counts {
            if let Some(&j) = index.get(term) {
                cluster_tf[c][j] += n as f64;
                segment_terms[s].push(j);
            }
        }
    }
    Ok(BagOfWords {
        vocab: Vocabulary {
            terms,
            index,
            df: df_vec,
        },
        cluster_tf,
        segment_terms,
    })
}
