//! Maximal marginal relevance selection.

use crate::embed_store::cosine_or_zero;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MmrSelection {
    /// Positions into the candidate list, in pick order.
    pub picked: Vec<usize>,
    /// Fewer candidates than requested.
    pub short: bool,
}

/// Greedy MMR with `λ = 1 − diversity`: each step maximizes
/// `λ·cos(w, topic) − (1−λ)·max_{s ∈ picked} cos(w, s)`. Ties keep the
/// earlier candidate.
pub fn mmr_diversify<T: Scalar>(candidates: &[Vec<T>], topic: &[T], diversity: f64, top_n: usize) -> MmrSelection {
    let short = candidates.len() < top_n;
    let n_pick = top_n.min(candidates.len());
    let lambda = T::of(1.0 - diversity);
    let relevance: Vec<T> = candidates.iter().map(|c| cosine_or_zero(c, topic)).collect();
    let mut redundancy: Vec<Option<T>> = vec![None; candidates.len()];
    let mut taken = vec![false; candidates.len()];
    let mut picked = Vec::with_capacity(n_pick);

    for step in 0..n_pick {
        let mut best: Option<(usize, T)> = None;
        for i in 0..candidates.len() {
            if taken[i] {
                continue;
            }
            let score = if step == 0 {
                relevance[i]
            } else {
                lambda * relevance[i] - (T::one() - lambda) * redundancy[i].unwrap_or_else(T::zero)
            };
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((i, score));
            }
        }
        let (p, _) = best.expect("candidate remains");
        taken[p] = true;
        picked.push(p);
        for i in 0..candidates.len() {
            if !taken[i] {
                let s = cosine_or_zero(&candidates[i], &candidates[p]);
                redundancy[i] = Some(redundancy[i].map_or(s, |r| r.max(s)));
            }
        }
    }
    MmrSelection { picked, short }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_diversity_is_similarity_ranking() {
        let c = vec![vec![0.0, 1.0], vec![1.0, 0.1], vec![1.0, 1.0]];
        let s = mmr_diversify(&c, &[1.0, 0.0], 0.0, 3);
        assert_eq!(s.picked, vec![1, 2, 0]);
        assert!(!s.short);
    }

    #[test]
    fn duplicate_is_deferred() {
        let c = vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.8, 0.6]];
        let s = mmr_diversify(&c, &[1.0, 0.2], 0.35, 3);
        assert_eq!(s.picked, vec![0, 2, 1]);
    }

    #[test]
    fn short_candidate_list_is_flagged() {
        let c = vec![vec![1.0f32, 0.0]];
        let s = mmr_diversify(&c, &[1.0, 0.0], 0.35, 15);
        assert_eq!(s.picked, vec![0]);
        assert!(s.short);
    }
}
