//! Stochastic layout optimization with negative sampling.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::fuzzy::FuzzyGraph;
use crate::scalar::Scalar;

/// Gradient components are clipped to this magnitude before scaling by the learning rate.
pub const GRAD_CLIP: f64 = 4.0;

#[derive(Debug, Clone, Copy)]
pub struct LayoutParams {
    pub a: f64,
    pub b: f64,
    pub n_epochs: usize,
    pub negative_sample_rate: usize,
    pub learning_rate: f64,
    pub repulsion_strength: f64,
}

#[inline]
fn clip(v: f64) -> f64 {
    v.clamp(-GRAD_CLIP, GRAD_CLIP)
}

/// Epoch period per edge: the heaviest edge is sampled every epoch.
pub fn epochs_per_sample(weights: &[f64], n_epochs: usize) -> Vec<f64> {
    let max = weights.iter().copied().fold(0.0f64, f64::max);
    weights
        .iter()
        .map(|&w| {
            let n_samples = n_epochs as f64 * (w / max);
            if n_samples > 0.0 {
                n_epochs as f64 / n_samples
            } else {
                -1.0
            }
        })
        .collect()
}

/// Optimizes `embedding` (row-major, `dim` columns) in place. Single-threaded and
/// deterministic for a given RNG state.
pub fn optimize<T: Scalar>(
    embedding: &mut [f64],
    dim: usize,
    graph: &FuzzyGraph<T>,
    params: &LayoutParams,
    rng: &mut ChaCha8Rng,
) {
    let n = graph.n;
    let mut heads = Vec::with_capacity(graph.nnz());
    let mut tails = Vec::with_capacity(graph.nnz());
    let mut weights = Vec::with_capacity(graph.nnz());
    for (i, row) in graph.rows.iter().enumerate() {
        for &(j, w) in row {
            heads.push(i);
            tails.push(j);
            weights.push(w.to_f64_lossy());
        }
    }
    if heads.is_empty() || params.n_epochs == 0 {
        return;
    }
    let eps = epochs_per_sample(&weights, params.n_epochs);
    let neg_rate = params.negative_sample_rate.max(1) as f64;
    let eps_neg: Vec<f64> = eps.iter().map(|e| e / neg_rate).collect();
    let mut next_sample = eps.clone();
    let mut next_neg = eps_neg.clone();
    let (a, b) = (params.a, params.b);
    let gamma = params.repulsion_strength;

    let mut cur = vec![0.0; dim];
    for epoch in 0..params.n_epochs {
        let alpha = params.learning_rate * (1.0 - epoch as f64 / params.n_epochs as f64);
        let e = epoch as f64;
        for idx in 0..heads.len() {
            if eps[idx] <= 0.0 || next_sample[idx] > e {
                continue;
            }
            let (j, k) = (heads[idx], tails[idx]);

            let dist_sq: f64 = (0..dim)
                .map(|d| {
                    let v = embedding[j * dim + d] - embedding[k * dim + d];
                    v * v
                })
                .sum();
            let coeff = if dist_sq > 0.0 {
                -2.0 * a * b * dist_sq.powf(b - 1.0) / (a * dist_sq.powf(b) + 1.0)
            } else {
                0.0
            };
            for d in 0..dim {
                let g = clip(coeff * (embedding[j * dim + d] - embedding[k * dim + d]));
                embedding[j * dim + d] += g * alpha;
                embedding[k * dim + d] -= g * alpha;
            }
            next_sample[idx] += eps[idx];

            let n_neg = ((e - next_neg[idx]) / eps_neg[idx]).floor().max(0.0) as usize;
            cur.copy_from_slice(&embedding[j * dim..(j + 1) * dim]);
            for _ in 0..n_neg {
                let other = rng.random_range(0..n);
                if other == j {
                    continue;
                }
                let dist_sq: f64 = (0..dim)
                    .map(|d| {
                        let v = cur[d] - embedding[other * dim + d];
                        v * v
                    })
                    .sum();
                let coeff = if dist_sq > 0.0 {
                    2.0 * gamma * b / ((0.001 + dist_sq) * (a * dist_sq.powf(b) + 1.0))
                } else {
                    0.0
                };
                if coeff > 0.0 {
                    for d in 0..dim {
                        cur[d] += clip(coeff * (cur[d] - embedding[other * dim + d])) * alpha;
                    }
                }
            }
            embedding[j * dim..(j + 1) * dim].copy_from_slice(&cur);
            next_neg[idx] += n_neg as f64 * eps_neg[idx];
        }
    }
}
