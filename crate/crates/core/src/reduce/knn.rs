use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::embed_store::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::scalar::{dot, euclidean, norm, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Cosine,
    Euclidean,
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "cosine" => Ok(Metric::Cosine),
            "euclidean" => Ok(Metric::Euclidean),
            other => Err(Error::invalid(format!("unknown metric {other:?}"))),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Metric::Cosine => "cosine",
            Metric::Euclidean => "euclidean",
        })
    }
}

/// Exact k nearest neighbors of every row, self excluded, ascending distance.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnGraph<T> {
    pub k: usize,
    pub indices: Vec<Vec<usize>>,
    pub distances: Vec<Vec<T>>,
}

/// Brute-force kNN. Cosine distance is `1 - cos`; ties go to the lower row index.
pub fn knn_graph<T: Scalar>(x: &EmbeddingMatrix<T>, k: usize, metric: Metric) -> Result<KnnGraph<T>> {
    let n = x.n_rows();
    if k == 0 || k >= n {
        return Err(Error::invalid(format!(
            "k = {k} neighbors needs 1 <= k < n_rows = {n}"
        )));
    }
    let unit: Option<Vec<Vec<T>>> = match metric {
        Metric::Euclidean => None,
        Metric::Cosine => {
            let mut rows = Vec::with_capacity(n);
            for (i, r) in x.rows().enumerate() {
                let nr = norm(r);
                if nr == T::zero() {
                    return Err(Error::invalid(format!(
                        "row {i} ({}) has zero norm; cosine distance is undefined",
                        x.ids()[i]
                    )));
                }
                rows.push(r.iter().map(|&v| v / nr).collect());
            }
            Some(rows)
        }
    };
    let dist = |i: usize, j: usize| -> T {
        match &unit {
            None => euclidean(x.row(i), x.row(j)),
            Some(u) => {
                let c = dot(&u[i], &u[j]).min(T::one()).max(-T::one());
                T::one() - c
            }
        }
    };

    let per_row: Vec<(Vec<usize>, Vec<T>)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut cand: Vec<(T, usize)> = (0..n).filter(|&j| j != i).map(|j| (dist(i, j), j)).collect();
            let cmp = |a: &(T, usize), b: &(T, usize)| {
                a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1))
            };
            if cand.len() > k {
                cand.select_nth_unstable_by(k - 1, cmp);
                cand.truncate(k);
            }
            cand.sort_by(cmp);
            cand.into_iter().map(|(d, j)| (j, d)).unzip()
        })
        .collect();
    let (indices, distances) = per_row.into_iter().unzip();
    Ok(KnnGraph { k, indices, distances })
}
