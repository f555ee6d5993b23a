//! Neighborhood-preservation score for embeddings.

use crate::embed_store::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::scalar::{squared_euclidean, Scalar};

fn ranked_neighbors<T: Scalar>(x: &EmbeddingMatrix<T>, i: usize) -> Vec<usize> {
    let mut others: Vec<(f64, usize)> = (0..x.n_rows())
        .filter(|&j| j != i)
        .map(|j| (squared_euclidean(x.row(i), x.row(j)).to_f64_lossy(), j))
        .collect();
    others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    others.into_iter().map(|p| p.1).collect()
}

/// Trustworthiness with Euclidean distances in both spaces.
///
/// `1 - 2/(n·k·(2n - 3k - 1)) · Σ_i Σ_{j ∈ U_k(i)} (r(i, j) - k)` where
/// `U_k(i)` are embedding neighbors that are not original neighbors and
/// `r(i, j)` is j's 1-based rank among i's original neighbors.
pub fn trustworthiness<T: Scalar, U: Scalar>(
    original: &EmbeddingMatrix<T>,
    embedded: &EmbeddingMatrix<U>,
    k: usize,
) -> Result<f64> {
    let n = original.n_rows();
    if embedded.n_rows() != n {
        return Err(Error::invalid("row count mismatch between spaces"));
    }
    if k == 0 || 2 * n < 3 * k + 2 {
        return Err(Error::invalid(format!("k = {k} too large for n = {n}")));
    }
    let mut penalty = 0.0f64;
    for i in 0..n {
        let orig = ranked_neighbors(original, i);
        let mut rank = vec![0usize; n];
        for (r, &j) in orig.iter().enumerate() {
            rank[j] = r + 1;
        }
        for &j in ranked_neighbors(embedded, i).iter().take(k) {
            if rank[j] > k {
                penalty += (rank[j] - k) as f64;
            }
        }
    }
    let (nf, kf) = (n as f64, k as f64);
    Ok(1.0 - 2.0 / (nf * kf * (2.0 * nf - 3.0 * kf - 1.0)) * penalty)
}
