//! Corpus-to-topics runs and the model directory layout.
//!
//! A model directory holds `labels.csv` (segment_id, topic_id),
//! `topics.json` and `reduced.emb1` with its `.ids` sidecar.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cluster::{hdbscan, ClusterResult};
use crate::config::ToolkitConfig;
use crate::corpus::Segment;
use crate::embed_store::{read_embeddings, write_embeddings, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::io;
use crate::reduce::{fit_transform, ReduceConfig};
use crate::scalar::Scalar;
use crate::topic_eval::{sweep, SweepRow};
use crate::topic_rep::{represent, PreparedCorpus, Topic, TopicModel};

pub const LABELS_FILE: &str = "labels.csv";
pub const TOPICS_FILE: &str = "topics.json";
pub const REDUCED_FILE: &str = "reduced.emb1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInputs {
    pub corpus: PathBuf,
    pub embeddings: PathBuf,
    #[serde(default)]
    pub config: Option<PathBuf>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicsFile {
    pub topics: Vec<Topic>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inputs: Option<ModelInputs>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
}

#[derive(Debug, Clone)]
pub struct FitResult<T> {
    pub corpus: PreparedCorpus<T>,
    pub reduced: EmbeddingMatrix<T>,
    pub clusters: ClusterResult,
    pub model: TopicModel<T>,
}

/// Reduction, clustering and representation with `seed` driving the layout.
pub fn fit<T: Scalar>(segments: &[Segment], embeddings: &EmbeddingMatrix<T>, config: &ToolkitConfig, seed: u64) -> Result<FitResult<T>> {
    let stopwords = config.stop_words.load()?;
    let corpus = PreparedCorpus::new(segments, embeddings, &stopwords)?;
    let reduce_cfg = ReduceConfig {
        seed,
        ..config.umap.clone()
    };
    let reduced = fit_transform(&corpus.embeddings, &reduce_cfg)?.embedding;
    let clusters = hdbscan(&reduced, &config.hdbscan)?;
    if clusters.n_clusters == 0 {
        return Err(Error::invalid(format!(
            "clustering found no topics among {} segments; lower min_cluster_size or min_samples",
            corpus.len()
        )));
    }
    let model = represent(&corpus, &clusters.labels, &config.topics)?;
    Ok(FitResult {
        corpus,
        reduced,
        clusters,
        model,
    })
}

pub fn write_labels_csv(path: &Path, ids: &[String], labels: &[i64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    w.write_record(["segment_id", "topic_id"]).map_err(|e| Error::io(path, e.into()))?;
    for (id, l) in ids.iter().zip(labels) {
        w.write_record([id.as_str(), &l.to_string()]).map_err(|e| Error::io(path, e.into()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_labels_csv(path: &Path) -> Result<Vec<(String, i64)>> {
    #[derive(Deserialize)]
    struct Row {
        segment_id: String,
        topic_id: i64,
    }
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    r.deserialize::<Row>()
        .enumerate()
        .map(|(i, row)| {
            row.map(|r| (r.segment_id, r.topic_id))
                .map_err(|e| Error::parse(format!("{}:{}", path.display(), i + 2), e.to_string()))
        })
        .collect()
}

pub fn write_model_dir<T: Scalar>(dir: &Path, fit: &FitResult<T>, inputs: Option<ModelInputs>, config: &ToolkitConfig) -> Result<()> {
    io::create_dir_all(dir)?;
    write_labels_csv(&dir.join(LABELS_FILE), &fit.corpus.ids, &fit.model.labels)?;
    let config_json = serde_json::to_value(config).map_err(|e| Error::invalid(e.to_string()))?;
    let file = TopicsFile {
        topics: fit.model.topics_with_noise(),
        inputs,
        config: Some(config_json),
    };
    io::write_json_pretty(&dir.join(TOPICS_FILE), &file)?;
    write_embeddings(&fit.reduced, &dir.join(REDUCED_FILE))
}

#[derive(Debug, Clone)]
pub struct ModelDir {
    pub dir: PathBuf,
    pub labels: Vec<(String, i64)>,
    pub topics: TopicsFile,
}

impl ModelDir {
    pub fn load(dir: &Path) -> Result<Self> {
        let labels = read_labels_csv(&dir.join(LABELS_FILE))?;
        let topics: TopicsFile = io::read_json(&dir.join(TOPICS_FILE))?;
        Ok(ModelDir {
            dir: dir.to_path_buf(),
            labels,
            topics,
        })
    }

    pub fn reduced(&self) -> Result<EmbeddingMatrix<f32>> {
        read_embeddings(&self.dir.join(REDUCED_FILE))
    }

    pub fn inputs(&self) -> Result<&ModelInputs> {
        self.topics.inputs.as_ref().ok_or_else(|| {
            Error::invalid(format!(
                "{} does not record its corpus and embeddings paths",
                self.dir.join(TOPICS_FILE).display()
            ))
        })
    }

    /// Topic sizes and word lists without the noise entry.
    pub fn non_noise_topics(&self) -> Vec<&Topic> {
        self.topics.topics.iter().filter(|t| t.id >= 0).collect()
    }

    /// Loads the corpus and embeddings the model was fitted on.
    pub fn load_inputs(&self) -> Result<(Vec<Segment>, EmbeddingMatrix<f32>)> {
        let inputs = self.inputs()?;
        Ok((io::read_jsonl(&inputs.corpus)?, read_embeddings(&inputs.embeddings)?))
    }

    /// Labels in corpus row order.
    pub fn labels_for(&self, ids: &[String]) -> Result<Vec<i64>> {
        let map: HashMap<&str, i64> = self.labels.iter().map(|(s, l)| (s.as_str(), *l)).collect();
        ids.iter()
            .map(|id| {
                map.get(id.as_str())
                    .copied()
                    .ok_or_else(|| Error::invalid(format!("segment {id} missing from {LABELS_FILE}")))
            })
            .collect()
    }
}

/// Rebuilds the fitted model from a model directory and sweeps K.
pub fn sweep_model_dir(dir: &Path, config: &ToolkitConfig, k_min: usize, k_max: usize) -> Result<Vec<SweepRow>> {
    let md = ModelDir::load(dir)?;
    let (segments, embeddings) = md.load_inputs()?;
    let stopwords = config.stop_words.load()?;
    let corpus = PreparedCorpus::new(&segments, &embeddings, &stopwords)?;
    let labels = md.labels_for(&corpus.ids)?;
    let base = represent(&corpus, &labels, &config.topics)?;
    sweep(&corpus, &base, &config.topics, &config.coherence, k_min, k_max)
}

/// Config recorded in `topics.json`, falling back to defaults.
pub fn recorded_config(md: &ModelDir) -> Result<ToolkitConfig> {
    match md.topics.inputs.as_ref().and_then(|i| i.config.as_ref()) {
        Some(p) => ToolkitConfig::from_file(p),
        None => Ok(ToolkitConfig::default()),
    }
}
