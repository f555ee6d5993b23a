//! Topic quality: diversity, C_v coherence and the K sweep.

pub mod coherence;
pub mod diversity;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use coherence::{coherence_cv, cooccurrence, npmi, Coherence, CooccurrenceStats, DEFAULT_EPSILON, DEFAULT_WINDOW};
pub use diversity::{topic_diversity, truncate_to_shortest};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::topic_rep::{reduce_to_k, PreparedCorpus, TopicConfig, TopicModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoherenceConfig {
    pub window: usize,
    pub epsilon: f64,
    pub topn: usize,
}

impl Default for CoherenceConfig {
    fn default() -> Self {
        CoherenceConfig {
            window: DEFAULT_WINDOW,
            epsilon: DEFAULT_EPSILON,
            topn: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "K")]
    pub k: usize,
    pub topic_diversity: f64,
    pub coherence_cv: f64,
}

/// TD and C_v of one model, C_v estimated on `tokens`.
pub fn score_topics(word_lists: &[Vec<String>], tokens: &[Vec<String>], config: &CoherenceConfig) -> Result<(f64, Coherence)> {
    let td = topic_diversity(&truncate_to_shortest(word_lists))?;
    let terms: Vec<String> = word_lists.iter().flatten().cloned().collect();
    let stats = cooccurrence(tokens, &terms, config.window, config.epsilon)?;
    Ok((td, coherence_cv(word_lists, &stats, config.topn)?))
}

/// Models for every K from `min(k_max, base topics)` down to `k_min`, each
/// obtained by merging the previous one.
pub fn sweep_models<T: Scalar>(
    corpus: &PreparedCorpus<T>,
    base: &TopicModel<T>,
    topic_config: &TopicConfig,
    k_min: usize,
    k_max: usize,
) -> Result<Vec<TopicModel<T>>> {
    if k_min < 1 || k_min > k_max {
        return Err(Error::invalid(format!("invalid K range {k_min}..={k_max}")));
    }
    if base.n_topics() < k_min {
        return Err(Error::invalid(format!(
            "base model has {} topics, fewer than k_min = {k_min}",
            base.n_topics()
        )));
    }
    let top = k_max.min(base.n_topics());
    let (mut current, _) = reduce_to_k(corpus, base, top, topic_config)?;
    let mut out = vec![current.clone()];
    for k in (k_min..top).rev() {
        current = reduce_to_k(corpus, &current, k, topic_config)?.0;
        out.push(current.clone());
    }
    Ok(out)
}

/// One row per K, ascending. The co-occurrence counts are built once over
/// the union of all models' words.
pub fn sweep<T: Scalar>(
    corpus: &PreparedCorpus<T>,
    base: &TopicModel<T>,
    topic_config: &TopicConfig,
    coherence: &CoherenceConfig,
    k_min: usize,
    k_max: usize,
) -> Result<Vec<SweepRow>> {
    let models = sweep_models(corpus, base, topic_config, k_min, k_max)?;
    let terms: Vec<String> = models.iter().flat_map(|m| m.word_lists()).flatten().collect();
    let stats = cooccurrence(&corpus.tokens, &terms, coherence.window, coherence.epsilon)?;
    let mut rows: Vec<SweepRow> = models
        .iter()
        .map(|m| {
            let lists = m.word_lists();
            Ok(SweepRow {
                k: m.n_topics(),
                topic_diversity: topic_diversity(&truncate_to_shortest(&lists))?,
                coherence_cv: coherence_cv(&lists, &stats, coherence.topn)?.score,
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by_key(|r| r.k);
    Ok(rows)
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    if let Some(parent) = path.parent() {
        crate::io::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::io(path, e.into()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    r.deserialize()
        .map(|row| row.map_err(|e| Error::parse(path.display().to_string(), e.to_string())))
        .collect()
}
