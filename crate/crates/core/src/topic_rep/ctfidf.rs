//! Class-based TF-IDF with the bm25-style idf term.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct CtfidfInputs<T> {
    /// `n_clusters × n_terms` raw counts.
    pub tf: Vec<Vec<T>>,
    /// Total count of each term across clusters.
    pub f: Vec<T>,
    /// Average number of words per cluster.
    pub a: T,
}

impl<T: Scalar> CtfidfInputs<T> {
    pub fn from_tf(tf: Vec<Vec<T>>) -> Result<Self> {
        let k = tf.len();
        let v = tf.first().map_or(0, Vec::len);
        if k == 0 || v == 0 || tf.iter().any(|r| r.len() != v) {
            return Err(Error::invalid("term-count matrix must be non-empty and rectangular"));
        }
        let mut f = vec![T::zero(); v];
        for row in &tf {
            for (acc, &x) in f.iter_mut().zip(row) {
                *acc += x;
            }
        }
        let total: T = f.iter().copied().sum();
        let a = total / T::of_usize(k);
        if !(a > T::zero()) {
            return Err(Error::invalid("average words per cluster must be positive"));
        }
        Ok(CtfidfInputs { tf, f, a })
    }
}

/// `tf · log(1 + (A − f + 0.5) / (f + 0.5))` in natural log.
#[inline]
pub fn bm25_weight<T: Scalar>(tf: T, a: T, f: T) -> T {
    let half = T::of(0.5);
    tf * (T::one() + (a - f + half) / (f + half)).ln()
}

pub fn ctfidf_bm25<T: Scalar>(inputs: &CtfidfInputs<T>) -> Vec<Vec<T>> {
    ctfidf_bm25_base(inputs, std::f64::consts::E)
}

/// Same weighting with the logarithm taken in `base`.
pub fn ctfidf_bm25_base<T: Scalar>(inputs: &CtfidfInputs<T>, base: f64) -> Vec<Vec<T>> {
    let scale = T::of(1.0 / base.ln());
    inputs
        .tf
        .iter()
        .map(|row| {
            row.iter()
                .zip(&inputs.f)
                .map(|(&tf, &f)| bm25_weight(tf, inputs.a, f) * scale)
                .collect()
        })
        .collect()
}

/// Up to `2 · top_n` columns with non-zero count, by weight descending and
/// then column index (columns are alphabetical).
pub fn top_words<T: Scalar>(weights: &[T], tf: &[T], top_n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..weights.len()).filter(|&j| tf[j] > T::zero()).collect();
    idx.sort_by(|&x, &y| {
        weights[y]
            .partial_cmp(&weights[x])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(x.cmp(&y))
    });
    idx.truncate(2 * top_n);
    idx
}
