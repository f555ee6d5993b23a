//! Manifold dimensionality reduction: kNN graph, fuzzy union, spectral init, SGD layout.

pub mod curve;
pub mod fuzzy;
pub mod knn;
pub mod layout;
pub mod quality;
pub mod spectral;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use curve::fit_ab;
pub use fuzzy::{fuzzy_union, smooth_weights, FuzzyGraph, SmoothKnn};
pub use knn::{knn_graph, KnnGraph, Metric};
pub use quality::trustworthiness;
pub use spectral::InitKind;

use crate::embed_store::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReduceConfig {
    pub n_neighbors: usize,
    pub n_components: usize,
    pub min_dist: f64,
    pub spread: f64,
    pub metric: Metric,
    pub n_epochs: usize,
    pub negative_sample_rate: usize,
    pub seed: u64,
}

impl Default for ReduceConfig {
    fn default() -> Self {
        ReduceConfig {
            n_neighbors: 5,
            n_components: 5,
            min_dist: 0.0,
            spread: 1.0,
            metric: Metric::Cosine,
            n_epochs: 500,
            negative_sample_rate: 5,
            seed: 42,
        }
    }
}

impl ReduceConfig {
    pub fn validate(&self, n_rows: usize) -> Result<()> {
        if self.n_components == 0 {
            return Err(Error::invalid("n_components must be at least 1"));
        }
        if n_rows <= self.n_components + 1 {
            return Err(Error::invalid(format!(
                "cannot reduce {n_rows} rows to {} components; need more than n_components + 1 rows",
                self.n_components
            )));
        }
        if self.n_neighbors < 2 || self.n_neighbors >= n_rows {
            return Err(Error::invalid(format!(
                "n_neighbors = {} needs 2 <= n_neighbors < n_rows = {n_rows}",
                self.n_neighbors
            )));
        }
        if !(self.min_dist >= 0.0) || !(self.spread > 0.0) || self.min_dist > self.spread {
            return Err(Error::invalid("need 0 <= min_dist <= spread and spread > 0"));
        }
        Ok(())
    }
}

/// Graph construction: kNN, per-row calibration, fuzzy union.
pub fn build_graph<T: Scalar>(x: &EmbeddingMatrix<T>, k: usize, metric: Metric) -> Result<FuzzyGraph<T>> {
    let knn = knn_graph(x, k, metric)?;
    let directed: Vec<Vec<(usize, T)>> = knn
        .indices
        .iter()
        .zip(&knn.distances)
        .map(|(idx, d)| {
            let s = smooth_weights(d, k);
            idx.iter().copied().zip(s.weights).collect()
        })
        .collect();
    Ok(fuzzy_union(&directed))
}

#[derive(Debug, Clone)]
pub struct Reduction<T> {
    pub embedding: EmbeddingMatrix<T>,
    pub init: InitKind,
    pub a: f64,
    pub b: f64,
}

/// Reduces `x` to `config.n_components` columns; ids carry over.
pub fn fit_transform<T: Scalar>(x: &EmbeddingMatrix<T>, config: &ReduceConfig) -> Result<Reduction<T>> {
    let n = x.n_rows();
    config.validate(n)?;
    let dim = config.n_components;
    let mut graph = build_graph(x, config.n_neighbors, config.metric)?;
    let max_w = graph.max_weight();
    graph.prune_below(max_w / T::of_usize(config.n_epochs.max(1)));

    let (a, b) = fit_ab(config.spread, config.min_dist);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let (init, kind) = spectral::initial_layout(&graph, dim, &mut rng);
    let mut flat: Vec<f64> = init.into_iter().flatten().collect();

    let params = layout::LayoutParams {
        a,
        b,
        n_epochs: config.n_epochs,
        negative_sample_rate: config.negative_sample_rate,
        learning_rate: 1.0,
        repulsion_strength: 1.0,
    };
    layout::optimize(&mut flat, dim, &graph, &params, &mut rng);

    if let Some(p) = flat.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("layout diverged at row {}", p / dim)));
    }
    let data = flat.into_iter().map(T::of).collect();
    let embedding = EmbeddingMatrix::new(n, dim, data, x.ids().to_vec())?;
    Ok(Reduction {
        embedding,
        init: kind,
        a,
        b,
    })
}
