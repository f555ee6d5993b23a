//! Sliding-window co-occurrence, NPMI and C_v coherence.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use crate::error::{Error, Result};

pub const DEFAULT_WINDOW: usize = 110;
pub const DEFAULT_EPSILON: f64 = 1e-12;

/// Boolean window counts for a fixed term list.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceStats {
    pub window: usize,
    pub epsilon: f64,
    pub total_windows: u64,
    pub terms: Vec<String>,
    pub term_windows: Vec<u64>,
    /// Keyed by `(i, j)` with `i < j`.
    pub pair_windows: HashMap<(usize, usize), u64>,
    index: HashMap<String, usize>,
}

impl CooccurrenceStats {
    pub fn term_index(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn p(&self, i: usize) -> f64 {
        self.term_windows[i] as f64 / self.total_windows as f64
    }

    pub fn p_joint(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.p(i);
        }
        let key = (i.min(j), i.max(j));
        self.pair_windows.get(&key).copied().unwrap_or(0) as f64 / self.total_windows as f64
    }

    /// NPMI by term; unknown terms score 0.
    pub fn npmi_terms(&self, x: &str, y: &str) -> f64 {
        match (self.term_index(x), self.term_index(y)) {
            (Some(i), Some(j)) => npmi(self.p(i), self.p(j), self.p_joint(i, j), self.epsilon),
            _ => 0.0,
        }
    }
}

/// `ln((p_xy + ε) / (p_x p_y)) / (−ln(p_xy + ε))`, clamped to [−1, 1].
/// A term that never occurs scores 0; when `p_xy + ε ≥ 1` the pair always
/// co-occurs and scores 1.
pub fn npmi(p_x: f64, p_y: f64, p_xy: f64, eps: f64) -> f64 {
    if p_x <= 0.0 || p_y <= 0.0 {
        return 0.0;
    }
    let denom = -(p_xy + eps).ln();
    if denom <= 0.0 {
        return 1.0;
    }
    (((p_xy + eps) / (p_x * p_y)).ln() / denom).clamp(-1.0, 1.0)
}

type LocalCounts = (u64, Vec<u64>, HashMap<(usize, usize), u64>);

fn segment_counts(tokens: &[String], index: &HashMap<String, usize>, lengths: &BTreeSet<usize>, window: usize, n_terms: usize) -> LocalCounts {
    let mut term = vec![0u64; n_terms];
    let mut pairs = HashMap::new();
    if tokens.is_empty() {
        return (0, term, pairs);
    }
    let mut occ: Vec<(usize, usize, usize)> = Vec::new();
    for p in 0..tokens.len() {
        for &len in lengths {
            if p + len > tokens.len() {
                break;
            }
            let key = if len == 1 { tokens[p].clone() } else { tokens[p..p + len].join(" ") };
            if let Some(&id) = index.get(&key) {
                occ.push((p, len, id));
            }
        }
    }
    let n_windows = if tokens.len() <= window { 1 } else { tokens.len() - window + 1 };
    let width = window.min(tokens.len());
    let mut present: Vec<usize> = Vec::new();
    for s in 0..n_windows {
        present.clear();
        let lo = occ.partition_point(|o| o.0 < s);
        for &(p, len, id) in &occ[lo..] {
            if p >= s + width {
                break;
            }
            if p + len <= s + width {
                present.push(id);
            }
        }
        present.sort_unstable();
        present.dedup();
        for (a, &i) in present.iter().enumerate() {
            term[i] += 1;
            for &j in &present[a + 1..] {
                *pairs.entry((i, j)).or_insert(0) += 1;
            }
        }
    }
    (n_windows as u64, term, pairs)
}

/// Counts windows of width `window` (stride 1) over each token list;
/// lists shorter than the window are one window, empty lists none.
/// Multi-word terms count when all their tokens fall inside the window.
pub fn cooccurrence(tokens: &[Vec<String>], terms: &[String], window: usize, epsilon: f64) -> Result<CooccurrenceStats> {
    if window == 0 {
        return Err(Error::invalid("window must be at least 1"));
    }
    let mut uniq: Vec<String> = terms.to_vec();
    uniq.sort();
    uniq.dedup();
    let index: HashMap<String, usize> = uniq.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    let lengths: BTreeSet<usize> = uniq.iter().map(|t| t.split(' ').count()).collect();
    let n = uniq.len();
    let (total, term_windows, pair_windows) = tokens
        .par_iter()
        .map(|t| segment_counts(t, &index, &lengths, window, n))
        .reduce(
            || (0, vec![0; n], HashMap::new()),
            |mut acc, part| {
                acc.0 += part.0;
                for (a, b) in acc.1.iter_mut().zip(&part.1) {
                    *a += b;
                }
                for (k, v) in part.2 {
                    *acc.2.entry(k).or_insert(0) += v;
                }
                acc
            },
        );
    if total == 0 {
        return Err(Error::invalid("reference corpus has no tokens"));
    }
    Ok(CooccurrenceStats {
        window,
        epsilon,
        total_windows: total,
        terms: uniq,
        term_windows,
        pair_windows,
        index,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Coherence {
    pub score: f64,
    pub per_topic: Vec<f64>,
    /// Some topic produced an all-zero NPMI vector.
    pub degenerate: bool,
}

fn cosine(u: &[f64], v: &[f64]) -> Option<f64> {
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    (nu > 0.0 && nv > 0.0).then(|| (dot / (nu * nv)).clamp(-1.0, 1.0))
}

/// C_v: per topic, the mean over its first `topn` words of
/// `cos(v(w_i), Σ_j v(w_j))` with `v(w_i) = (NPMI(w_i, w_j))_j`; averaged over topics.
pub fn coherence_cv(topics: &[Vec<String>], stats: &CooccurrenceStats, topn: usize) -> Result<Coherence> {
    if topics.is_empty() {
        return Err(Error::invalid("no topics to score"));
    }
    let mut degenerate = false;
    let mut per_topic = Vec::with_capacity(topics.len());
    for words in topics {
        let w = &words[..topn.min(words.len())];
        if w.is_empty() {
            return Err(Error::invalid("topic has no words"));
        }
        let vectors: Vec<Vec<f64>> = w
            .iter()
            .map(|x| w.iter().map(|y| stats.npmi_terms(x, y)).collect())
            .collect();
        let mut total = vec![0.0; w.len()];
        for v in &vectors {
            for (t, x) in total.iter_mut().zip(v) {
                *t += x;
            }
        }
        let mut sum = 0.0;
        for v in &vectors {
            match cosine(v, &total) {
                Some(c) => sum += c,
                None => degenerate = true,
            }
        }
        per_topic.push(sum / w.len() as f64);
    }
    let score = per_topic.iter().sum::<f64>() / per_topic.len() as f64;
    Ok(Coherence {
        score,
        per_topic,
        degenerate,
    })
}
