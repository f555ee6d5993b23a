//! Density-based hierarchical clustering over mutual-reachability distances.

mod tree;

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use tree::{build_hierarchy, condense, extract, stabilities, CondensedRow, CondensedTree, Extraction, Merge};

use crate::embed_store::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::scalar::{euclidean, Scalar};

pub const NOISE: i64 = -1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ClusterConfig {
    pub min_cluster_size: usize,
    pub min_samples: usize,
    /// Let the root compete under excess of mass. The root is always selected
    /// when it has no child clusters.
    pub allow_single_cluster: bool,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            min_cluster_size: 5,
            min_samples: 5,
            allow_single_cluster: false,
        }
    }
}

impl ClusterConfig {
    pub fn validate(&self, n_rows: usize) -> Result<()> {
        if self.min_cluster_size < 2 {
            return Err(Error::invalid("min_cluster_size must be at least 2"));
        }
        if self.min_samples < 1 || self.min_samples >= n_rows {
            return Err(Error::invalid(format!(
                "min_samples = {} needs 1 <= min_samples < n_rows = {n_rows}",
                self.min_samples
            )));
        }
        Ok(())
    }
}

/// Distance to the `min_samples`-th nearest other point.
pub fn core_distances<T: Scalar>(z: &EmbeddingMatrix<T>, min_samples: usize) -> Result<Vec<T>> {
    let n = z.n_rows();
    if min_samples == 0 || min_samples >= n {
        return Err(Error::invalid(format!(
            "min_samples = {min_samples} needs 1 <= min_samples < n_rows = {n}"
        )));
    }
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let mut d: Vec<T> = (0..n)
                .filter(|&j| j != i)
                .map(|j| euclidean(z.row(i), z.row(j)))
                .collect();
            let (_, kth, _) = d.select_nth_unstable_by(min_samples - 1, |a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
            *kth
        })
        .collect())
}

#[inline]
pub fn mutual_reachability<T: Scalar>(d: T, core_i: T, core_j: T) -> T {
    d.max(core_i).max(core_j)
}

/// Undirected MST edge with `a < b`. `distance` is the secondary sort key
/// among equal weights (the raw distance for mutual-reachability graphs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T> {
    pub a: usize,
    pub b: usize,
    pub weight: T,
    pub distance: T,
}

type Key<T> = (T, T, (usize, usize));

fn key_less<T: Scalar>(x: &Key<T>, y: &Key<T>) -> bool {
    let ord = x
        .0
        .partial_cmp(&y.0)
        .unwrap_or(Ordering::Equal)
        .then(x.1.partial_cmp(&y.1).unwrap_or(Ordering::Equal))
        .then(x.2.cmp(&y.2));
    ord == Ordering::Less
}

/// Prim's algorithm on the complete graph given by `weight(i, j)`, started at
/// row 0. Ties go to the lexicographically smaller `(min, max)` index pair.
pub fn prim_mst<T: Scalar, F: Fn(usize, usize) -> T>(n: usize, weight: F) -> Vec<Edge<T>> {
    prim_mst_keyed(n, |i, j| {
        let w = weight(i, j);
        (w, w)
    })
}

/// Prim's algorithm ordered by `(weight, secondary, index pair)`.
pub fn prim_mst_keyed<T: Scalar, F: Fn(usize, usize) -> (T, T)>(n: usize, weight: F) -> Vec<Edge<T>> {
    if n < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut key: Vec<Key<T>> = vec![(T::infinity(), T::infinity(), (usize::MAX, usize::MAX)); n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut u = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let mut best: Option<usize> = None;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let (w, d) = weight(u, v);
            let cand = (w, d, (u.min(v), u.max(v)));
            if key_less(&cand, &key[v]) {
                key[v] = cand;
            }
            best = match best {
                Some(b) if !key_less(&key[v], &key[b]) => Some(b),
                _ => Some(v),
            };
        }
        let v = best.expect("unvisited vertex remains");
        in_tree[v] = true;
        let (weight, distance, (a, b)) = key[v];
        edges.push(Edge { a, b, weight, distance });
        u = v;
    }
    edges
}

/// MST of the mutual-reachability graph, distances computed on the fly.
/// Equal reachability weights are ordered by raw distance, so the tree does
/// not depend on row order for points in general position.
pub fn mst<T: Scalar>(z: &EmbeddingMatrix<T>, core: &[T]) -> Vec<Edge<T>> {
    prim_mst_keyed(z.n_rows(), |i, j| {
        let d = euclidean(z.row(i), z.row(j));
        (mutual_reachability(d, core[i], core[j]), d)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterResult {
    /// Per-row label, `-1` is noise; labels are numbered by first appearance.
    pub labels: Vec<i64>,
    pub n_clusters: usize,
    /// Stability of each output label.
    pub stabilities: Vec<f64>,
    #[serde(skip)]
    pub tree: CondensedTree,
}

impl ClusterResult {
    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.n_clusters];
        for &l in &self.labels {
            if l >= 0 {
                s[l as usize] += 1;
            }
        }
        s
    }
}

pub fn hdbscan<T: Scalar>(z: &EmbeddingMatrix<T>, config: &ClusterConfig) -> Result<ClusterResult> {
    let n = z.n_rows();
    config.validate(n)?;
    let core = core_distances(z, config.min_samples)?;
    let edges = mst(z, &core);
    let merges = build_hierarchy(n, &edges);
    let tree = condense(n, &merges, config.min_cluster_size);
    let ex = extract(&tree, config.allow_single_cluster);
    Ok(ClusterResult {
        labels: ex.labels,
        n_clusters: ex.stabilities.len(),
        stabilities: ex.stabilities,
        tree,
    })
}
