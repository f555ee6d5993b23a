//! Smooth kNN calibration and fuzzy-set union.

use std::collections::BTreeMap;

use crate::scalar::Scalar;

const SIGMA_LO: f64 = 1e-12;
const SIGMA_HI: f64 = 1e4;
const BISECTION_STEPS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothKnn<T> {
    pub rho: T,
    pub sigma: T,
    pub weights: Vec<T>,
}

/// Calibrates one row: `rho` is the nearest distance and `sigma` is chosen so
/// that `Σ exp(-max(0, d - rho) / sigma) = log2(k)`.
///
/// `distances` must be sorted ascending. When the target cannot be reached
/// inside the sigma bracket (e.g. all distances equal) sigma sticks to the
/// nearer bracket end.
pub fn smooth_weights<T: Scalar>(distances: &[T], k: usize) -> SmoothKnn<T> {
    if distances.is_empty() {
        return SmoothKnn {
            rho: T::zero(),
            sigma: T::one(),
            weights: Vec::new(),
        };
    }
    let d: Vec<f64> = distances.iter().map(|v| v.to_f64_lossy()).collect();
    let rho = d[0];
    let target = (k as f64).log2();
    let mass = |sigma: f64| -> f64 { d.iter().map(|&x| (-(x - rho).max(0.0) / sigma).exp()).sum() };

    let (mut lo, mut hi) = (SIGMA_LO, SIGMA_HI);
    let sigma = if mass(hi) <= target {
        hi
    } else if mass(lo) >= target {
        lo
    } else {
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if mass(mid) > target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let weights = d
        .iter()
        .map(|&x| T::of((-(x - rho).max(0.0) / sigma).exp()))
        .collect();
    SmoothKnn {
        rho: T::of(rho),
        sigma: T::of(sigma),
        weights,
    }
}

/// Symmetric sparse membership graph; rows sorted by column, no diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyGraph<T> {
    pub n: usize,
    pub rows: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> FuzzyGraph<T> {
    pub fn weight(&self, i: usize, j: usize) -> T {
        self.rows[i]
            .binary_search_by_key(&j, |e| e.0)
            .map(|p| self.rows[i][p].1)
            .unwrap_or_else(|_| T::zero())
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn max_weight(&self) -> T {
        self.rows
            .iter()
            .flatten()
            .map(|e| e.1)
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Zeroes entries below `threshold` and drops them.
    pub fn prune_below(&mut self, threshold: T) {
        for r in &mut self.rows {
            r.retain(|e| e.1 >= threshold);
        }
    }

    /// Undirected edges `(i, j, w)` with `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize, T)> {
        let mut out = Vec::with_capacity(self.nnz() / 2);
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, w) in r {
                if i < j {
                    out.push((i, j, w));
                }
            }
        }
        out
    }
}

/// `W = A + Aᵀ − A∘Aᵀ` for directed per-row weights `(column, weight)`.
pub fn fuzzy_union<T: Scalar>(directed: &[Vec<(usize, T)>]) -> FuzzyGraph<T> {
    let n = directed.len();
    let mut a: Vec<BTreeMap<usize, T>> = vec![BTreeMap::new(); n];
    for (i, row) in directed.iter().enumerate() {
        for &(j, w) in row {
            if i != j && w > T::zero() {
                a[i].insert(j, w);
            }
        }
    }
    let mut rows: Vec<BTreeMap<usize, T>> = vec![BTreeMap::new(); n];
    for i in 0..n {
        for (&j, &w) in &a[i] {
            let back = a[j].get(&i).copied().unwrap_or_else(T::zero);
            let s = w + back - w * back;
            rows[i].insert(j, s);
            rows[j].insert(i, s);
        }
    }
    FuzzyGraph {
        n,
        rows: rows.into_iter().map(|r| r.into_iter().collect()).collect(),
    }
}
