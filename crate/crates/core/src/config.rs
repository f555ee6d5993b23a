//! INI toolkit configuration. Unknown sections and keys are rejected.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use ini::Ini;
use serde::Serialize;

use crate::cluster::ClusterConfig;
use crate::error::{Error, Result};
use crate::interpret::{GenerationParams, ProviderConfig, TaskKind};
use crate::reduce::{Metric, ReduceConfig};
use crate::topic_eval::CoherenceConfig;
use crate::topic_rep::{Stopwords, TopicConfig};

/// Settings used by the embedding adapter; carried for provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingConfig {
    pub id_model: String,
    pub max_seq_length: usize,
    pub batch_size: usize,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        EmbeddingConfig {
            id_model: "dlicari/distil-ita-legal-bert".into(),
            max_seq_length: 512,
            batch_size: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub enum StopwordSource {
    #[default]
    Italian,
    None,
    File(PathBuf),
}

impl StopwordSource {
    pub fn load(&self) -> Result<Stopwords> {
        match self {
            StopwordSource::Italian => Ok(Stopwords::italian()),
            StopwordSource::None => Ok(Stopwords::default()),
            StopwordSource::File(p) => Stopwords::from_file(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToolkitConfig {
    pub embedding: EmbeddingConfig,
    pub umap: ReduceConfig,
    pub hdbscan: ClusterConfig,
    pub stop_words: StopwordSource,
    pub topics: TopicConfig,
    pub coherence: CoherenceConfig,
    #[serde(skip)]
    pub llm: BTreeMap<String, ProviderConfig>,
}

impl Default for ToolkitConfig {
    fn default() -> Self {
        ToolkitConfig {
            embedding: EmbeddingConfig::default(),
            umap: ReduceConfig::default(),
            hdbscan: ClusterConfig::default(),
            stop_words: StopwordSource::Italian,
            topics: TopicConfig::default(),
            coherence: CoherenceConfig::default(),
            llm: BTreeMap::new(),
        }
    }
}

fn value<T: FromStr>(section: &str, key: &str, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.trim()
        .parse()
        .map_err(|e| Error::invalid(format!("[{section}] {key} = {raw:?}: {e}")))
}

fn parse_bool(section: &str, key: &str, raw: &str) -> Result<bool> {
    match raw.trim().to_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::invalid(format!("[{section}] {key} = {raw:?}: expected true or false"))),
    }
}

/// Accepts "1,2", "(1, 2)" or "1 2".
pub fn parse_ngram_range(raw: &str) -> Result<(usize, usize)> {
    let cleaned = raw.trim().trim_start_matches('(').trim_end_matches(')');
    let parts: Vec<&str> = cleaned
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|p| !p.is_empty())
        .collect();
    let bad = || Error::invalid(format!("ngram_range {raw:?}: expected two integers like (1, 2)"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let lo: usize = parts[0].parse().map_err(|_| bad())?;
    let hi: usize = parts[1].parse().map_err(|_| bad())?;
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn unknown(section: &str, key: &str) -> Error {
    Error::invalid(format!("unknown key {key:?} in [{section}]"))
}

impl ToolkitConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = crate::io::read_to_string(path)?;
        Self::parse(&text).map_err(|e| match e {
            Error::Invalid(msg) => Error::parse(path.display().to_string(), msg),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let ini = Ini::load_from_str(text).map_err(|e| Error::invalid(format!("config syntax: {e}")))?;
        let mut cfg = ToolkitConfig::default();
        for (section, props) in ini.iter() {
            let Some(section) = section else {
                if let Some((k, _)) = props.iter().next() {
                    return Err(Error::invalid(format!("key {k:?} appears before any [section]")));
                }
                continue;
            };
            if let Some(name) = section.strip_prefix("llm.") {
                let p = parse_provider(section, name, props.iter())?;
                cfg.llm.insert(name.to_string(), p);
                continue;
            }
            for (key, raw) in props.iter() {
                cfg.apply(section, key, raw)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, section: &str, key: &str, raw: &str) -> Result<()> {
        match (section, key) {
            ("embedding", "id_model") => self.embedding.id_model = raw.trim().to_string(),
            ("embedding", "max_seq_length") => self.embedding.max_seq_length = value(section, key, raw)?,
            ("embedding", "batch_size") => self.embedding.batch_size = value(section, key, raw)?,
            ("embedding", _) => return Err(unknown(section, key)),

            ("umap", "n_neighbors") => self.umap.n_neighbors = value(section, key, raw)?,
            ("umap", "n_components") => self.umap.n_components = value(section, key, raw)?,
            ("umap", "min_dist") => self.umap.min_dist = value(section, key, raw)?,
            ("umap", "spread") => self.umap.spread = value(section, key, raw)?,
            ("umap", "metric") => self.umap.metric = Metric::from_str(raw)?,
            ("umap", "n_epochs") => self.umap.n_epochs = value(section, key, raw)?,
            ("umap", "negative_sample_rate") => self.umap.negative_sample_rate = value(section, key, raw)?,
            ("umap", _) => return Err(unknown(section, key)),

            ("hdbscan", "min_cluster_size") => self.hdbscan.min_cluster_size = value(section, key, raw)?,
            ("hdbscan", "min_samples") => self.hdbscan.min_samples = value(section, key, raw)?,
            ("hdbscan", "allow_single_cluster") => self.hdbscan.allow_single_cluster = parse_bool(section, key, raw)?,
            ("hdbscan", "metric") => {
                if raw.trim() != "euclidean" {
                    return Err(Error::invalid(format!("[hdbscan] metric = {raw:?}: only euclidean is supported")));
                }
            }
            ("hdbscan", _) => return Err(unknown(section, key)),

            ("vectorizer", "ngram_range") => self.topics.ngram_range = parse_ngram_range(raw)?,
            ("vectorizer", "min_df") => self.topics.min_df = value(section, key, raw)?,
            ("vectorizer", "stop_words") => {
                self.stop_words = match raw.trim() {
                    "italian" | "stopwords" => StopwordSource::Italian,
                    "none" => StopwordSource::None,
                    path => StopwordSource::File(PathBuf::from(path)),
                }
            }
            ("vectorizer", _) => return Err(unknown(section, key)),

            ("topics", "top_n_words") => self.topics.top_n_words = value(section, key, raw)?,
            ("topics", "diversity") => self.topics.diversity = value(section, key, raw)?,
            ("topics", "n_representative") => self.topics.n_representative = value(section, key, raw)?,
            ("topics", "log_base") => {
                self.topics.log_base = match raw.trim() {
                    "e" => std::f64::consts::E,
                    other => value(section, key, other)?,
                }
            }
            ("topics", _) => return Err(unknown(section, key)),

            ("coherence", "window") => self.coherence.window = value(section, key, raw)?,
            ("coherence", "epsilon") => self.coherence.epsilon = value(section, key, raw)?,
            ("coherence", "topn") => self.coherence.topn = value(section, key, raw)?,
            ("coherence", _) => return Err(unknown(section, key)),

            _ => return Err(Error::invalid(format!("unknown section [{section}]"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.topics.validate()?;
        if self.umap.n_components == 0 || self.umap.n_neighbors < 2 {
            return Err(Error::invalid("[umap] needs n_components >= 1 and n_neighbors >= 2"));
        }
        if self.hdbscan.min_cluster_size < 2 || self.hdbscan.min_samples < 1 {
            return Err(Error::invalid("[hdbscan] needs min_cluster_size >= 2 and min_samples >= 1"));
        }
        if self.coherence.window == 0 || self.coherence.topn == 0 {
            return Err(Error::invalid("[coherence] window and topn must be positive"));
        }
        for p in self.llm.values() {
            p.validate()?;
        }
        Ok(())
    }

    pub fn provider(&self, name: &str) -> Result<&ProviderConfig> {
        self.llm.get(name).ok_or_else(|| {
            let known: Vec<&str> = self.llm.keys().map(String::as_str).collect();
            Error::invalid(format!("no [llm.{name}] section; configured providers: {known:?}"))
        })
    }
}

fn parse_provider<'a>(section: &str, name: &str, props: impl Iterator<Item = (&'a str, &'a str)>) -> Result<ProviderConfig> {
    let mut p = ProviderConfig::new(name, "", "");
    let mut explicit: Vec<(TaskKind, &str, &str)> = Vec::new();
    let mut sampling = "reference";
    for (key, raw) in props {
        match key {
            "endpoint" => p.endpoint = raw.trim().to_string(),
            "model" => p.model = raw.trim().to_string(),
            "auth_header" => p.auth_header = Some(raw.trim().to_string()),
            "timeout_secs" => p.timeout = Duration::from_secs_f64(value(section, key, raw)?),
            "attempts" => p.attempts = value(section, key, raw)?,
            "backoff_ms" => p.backoff_base = Duration::from_millis(value(section, key, raw)?),
            "parallelism" => p.parallelism = value(section, key, raw)?,
            "sampling" => {
                sampling = match raw.trim() {
                    "reference" => "reference",
                    "omit" => "omit",
                    _ => return Err(Error::invalid(format!("[{section}] sampling = {raw:?}: expected reference or omit"))),
                }
            }
            _ => {
                let (task, field) = key
                    .split_once('_')
                    .and_then(|(t, f)| TaskKind::from_str(t).ok().map(|t| (t, f)))
                    .ok_or_else(|| unknown(section, key))?;
                if !matches!(field, "max_new_tokens" | "temperature" | "repetition_penalty") {
                    return Err(unknown(section, key));
                }
                explicit.push((task, field, raw));
            }
        }
    }
    if sampling == "omit" {
        p.label = GenerationParams::default();
        p.summary = GenerationParams::default();
    }
    for (task, field, raw) in explicit {
        let params = match task {
            TaskKind::Label => &mut p.label,
            TaskKind::Summary => &mut p.summary,
        };
        match field {
            "max_new_tokens" => params.max_new_tokens = Some(value(section, field, raw)?),
            "temperature" => params.temperature = Some(value(section, field, raw)?),
            _ => params.repetition_penalty = Some(value(section, field, raw)?),
        }
    }
    if p.model.is_empty() {
        p.model = name.to_string();
    }
    Ok(p)
}
