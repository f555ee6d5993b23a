//! Topic representation: bag of n-grams, c-TF-IDF-bm25, MMR and representative segments.

pub mod ctfidf;
pub mod mmr;
pub mod tokenize;
pub mod vocab;

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

pub use ctfidf::{bm25_weight, ctfidf_bm25, ctfidf_bm25_base, top_words, CtfidfInputs};
pub use mmr::{mmr_diversify, MmrSelection};
pub use tokenize::{ngrams, tokenize, Stopwords};
pub use vocab::{build_vocab, BagOfWords, Vocabulary};

use crate::cluster::NOISE;
use crate::corpus::Segment;
use crate::embed_store::{centroid, cosine_or_zero, l2_normalized, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TopicConfig {
    pub ngram_range: (usize, usize),
    pub min_df: usize,
    pub top_n_words: usize,
    pub diversity: f64,
    pub n_representative: usize,
    pub log_base: f64,
}

impl Default for TopicConfig {
    fn default() -> Self {
        TopicConfig {
            ngram_range: (1, 2),
            min_df: 2,
            top_n_words: 15,
            diversity: 0.35,
            n_representative: 3,
            log_base: std::f64::consts::E,
        }
    }
}

impl TopicConfig {
    pub fn validate(&self) -> Result<()> {
        if self.top_n_words == 0 {
            return Err(Error::invalid("top_n_words must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.diversity) {
            return Err(Error::invalid("diversity must lie in [0, 1]"));
        }
        if !(self.log_base > 1.0) {
            return Err(Error::invalid("log_base must be greater than 1"));
        }
        if self.ngram_range.0 == 0 || self.ngram_range.0 > self.ngram_range.1 {
            return Err(Error::invalid(format!("invalid ngram_range {:?}", self.ngram_range)));
        }
        Ok(())
    }
}

/// Segment ids, token lists and original embeddings aligned by row.
#[derive(Debug, Clone)]
pub struct PreparedCorpus<T> {
    pub ids: Vec<String>,
    pub texts: Vec<String>,
    pub tokens: Vec<Vec<String>>,
    pub embeddings: EmbeddingMatrix<T>,
}

impl<T: Scalar> PreparedCorpus<T> {
    /// Reorders embedding rows to segment order by id.
    pub fn new(segments: &[Segment], embeddings: &EmbeddingMatrix<T>, stopwords: &Stopwords) -> Result<Self> {
        let pos: std::collections::HashMap<&str, usize> =
            embeddings.ids().iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut order = Vec::with_capacity(segments.len());
        for s in segments {
            match pos.get(s.segment_id.as_str()) {
                Some(&i) => order.push(i),
                None => {
                    return Err(Error::invalid(format!(
                        "segment {} has no embedding row",
                        s.segment_id
                    )))
                }
            }
        }
        if order.is_empty() {
            return Err(Error::invalid("corpus is empty"));
        }
        Ok(PreparedCorpus {
            ids: segments.iter().map(|s| s.segment_id.clone()).collect(),
            texts: segments.iter().map(|s| s.text.clone()).collect(),
            tokens: segments.iter().map(|s| tokenize(&s.text, stopwords)).collect(),
            embeddings: embeddings.select(&order)?,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicWord {
    pub term: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topic {
    pub id: i64,
    pub size: usize,
    pub words: Vec<TopicWord>,
    pub representative_docs: Vec<String>,
}

impl Topic {
    pub fn terms(&self) -> Vec<String> {
        self.words.iter().map(|w| w.term.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel<T> {
    pub labels: Vec<i64>,
    /// Non-noise topics, indexed by label.
    pub topics: Vec<Topic>,
    pub noise_size: usize,
    pub centroids: Vec<Vec<T>>,
    pub warnings: Vec<String>,
}

impl<T> TopicModel<T> {
    pub fn n_topics(&self) -> usize {
        self.topics.len()
    }

    /// Word lists of the non-noise topics.
    pub fn word_lists(&self) -> Vec<Vec<String>> {
        self.topics.iter().map(Topic::terms).collect()
    }

    /// All topics with the noise entry first when present.
    pub fn topics_with_noise(&self) -> Vec<Topic> {
        let mut out = Vec::with_capacity(self.topics.len() + 1);
        if self.noise_size > 0 {
            out.push(Topic {
                id: NOISE,
                size: self.noise_size,
                words: Vec::new(),
                representative_docs: Vec::new(),
            });
        }
        out.extend(self.topics.iter().cloned());
        out
    }
}

fn members_by_label(labels: &[i64], k: usize) -> Vec<Vec<usize>> {
    let mut m = vec![Vec::new(); k];
    for (i, &l) in labels.iter().enumerate() {
        if l >= 0 {
            m[l as usize].push(i);
        }
    }
    m
}

/// The `n` members closest to `center` by cosine; ties by id.
pub fn representative_docs<T: Scalar>(
    embeddings: &EmbeddingMatrix<T>,
    ids: &[String],
    members: &[usize],
    center: &[T],
    n: usize,
) -> Vec<usize> {
    let mut scored: Vec<(T, usize)> = members
        .iter()
        .map(|&i| (cosine_or_zero(embeddings.row(i), center), i))
        .collect();
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| ids[a.1].cmp(&ids[b.1]))
    });
    scored.into_iter().take(n).map(|p| p.1).collect()
}

/// L2-normalized mean embedding of `members` whose term set contains `term`.
fn word_vector<T: Scalar>(corpus: &PreparedCorpus<T>, bow: &BagOfWords, members: &[usize], term: usize) -> Vec<T> {
    let rows: Vec<usize> = members
        .iter()
        .copied()
        .filter(|&s| bow.segment_terms[s].binary_search(&term).is_ok())
        .collect();
    match centroid(&corpus.embeddings, &rows) {
        Ok(c) => l2_normalized(&c),
        Err(_) => vec![T::zero(); corpus.embeddings.n_dims()],
    }
}

/// Describes every non-noise label: c-TF-IDF candidates, MMR selection,
/// representative segments and centroid. Labels must be dense `0..k`.
pub fn represent<T: Scalar>(corpus: &PreparedCorpus<T>, labels: &[i64], config: &TopicConfig) -> Result<TopicModel<T>> {
    config.validate()?;
    if labels.len() != corpus.len() {
        return Err(Error::invalid(format!(
            "{} labels for {} segments",
            labels.len(),
            corpus.len()
        )));
    }
    let k = (labels.iter().copied().max().unwrap_or(NOISE) + 1).max(0) as usize;
    let members = members_by_label(labels, k);
    if let Some(c) = members.iter().position(Vec::is_empty) {
        return Err(Error::invalid(format!("topic {c} has no members; labels must be dense")));
    }
    let mut bow = build_vocab(&corpus.tokens, labels, config.ngram_range, config.min_df)?;
    for t in &mut bow.segment_terms {
        t.sort_unstable();
    }
    let tf: Vec<Vec<T>> = bow
        .cluster_tf
        .iter()
        .map(|r| r.iter().map(|&x| T::of(x)).collect())
        .collect();
    let inputs = CtfidfInputs::from_tf(tf)?;
    let weights = ctfidf_bm25_base(&inputs, config.log_base);

    let mut topics = Vec::with_capacity(k);
    let mut centroids = Vec::with_capacity(k);
    let mut warnings = Vec::new();
    for c in 0..k {
        let center = centroid(&corpus.embeddings, &members[c])?;
        let cands = top_words(&weights[c], &inputs.tf[c], config.top_n_words);
        let vectors: Vec<Vec<T>> = cands
            .iter()
            .map(|&j| word_vector(corpus, &bow, &members[c], j))
            .collect();
        let sel = mmr_diversify(&vectors, &center, config.diversity, config.top_n_words);
        if sel.short {
            warnings.push(format!(
                "topic {c}: only {} candidate terms for top_n_words = {}",
                cands.len(),
                config.top_n_words
            ));
        }
        let mut words: Vec<TopicWord> = sel
            .picked
            .iter()
            .map(|&p| TopicWord {
                term: bow.vocab.terms[cands[p]].clone(),
                weight: weights[c][cands[p]].to_f64_lossy(),
            })
            .collect();
        words.sort_by(|a, b| b.weight.total_cmp(&a.weight).then_with(|| a.term.cmp(&b.term)));
        let reps = representative_docs(&corpus.embeddings, &corpus.ids, &members[c], &center, config.n_representative);
        topics.push(Topic {
            id: c as i64,
            size: members[c].len(),
            words,
            representative_docs: reps.iter().map(|&i| corpus.ids[i].clone()).collect(),
        });
        centroids.push(center);
    }
    Ok(TopicModel {
        labels: labels.to_vec(),
        topics,
        noise_size: labels.iter().filter(|&&l| l == NOISE).count(),
        centroids,
        warnings,
    })
}

/// Renumbers non-negative labels densely by first appearance in row order.
pub fn renumber(labels: &[i64]) -> Vec<i64> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            if l < 0 {
                NOISE
            } else {
                let next = map.len() as i64;
                *map.entry(l).or_insert(next)
            }
        })
        .collect()
}

/// One merge: group `absorbed` joins group `kept`, both named by their
/// lowest original label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeStep {
    pub kept: i64,
    pub absorbed: i64,
    pub similarity: f64,
}

/// Merge plan from `labels` down to `k` groups: repeatedly join the pair
/// with the highest centroid cosine, ties to the smaller pair. Returns the
/// merged labels (renumbered densely) and the steps.
pub fn merge_labels<T: Scalar>(
    embeddings: &EmbeddingMatrix<T>,
    labels: &[i64],
    k: usize,
) -> Result<(Vec<i64>, Vec<MergeStep>)> {
    let current = (labels.iter().copied().max().unwrap_or(NOISE) + 1).max(0) as usize;
    if k == 0 || k > current {
        return Err(Error::invalid(format!(
            "cannot reduce {current} topics to K = {k}"
        )));
    }
    let mut group: Vec<i64> = labels.to_vec();
    let mut alive: Vec<i64> = (0..current as i64).collect();
    let members = |g: &[i64], id: i64| -> Vec<usize> { (0..g.len()).filter(|&i| g[i] == id).collect() };
    let mut centers: std::collections::BTreeMap<i64, Vec<T>> = std::collections::BTreeMap::new();
    for &id in &alive {
        centers.insert(id, centroid(embeddings, &members(&group, id))?);
    }
    let mut steps = Vec::new();
    while alive.len() > k {
        let mut best: Option<(T, i64, i64)> = None;
        for (x, &a) in alive.iter().enumerate() {
            for &b in &alive[x + 1..] {
                let s = cosine_or_zero(&centers[&a], &centers[&b]);
                if best.is_none_or(|(bs, _, _)| s > bs) {
                    best = Some((s, a, b));
                }
            }
        }
        let (s, a, b) = best.expect("at least two groups");
        for g in group.iter_mut() {
            if *g == b {
                *g = a;
            }
        }
        alive.retain(|&x| x != b);
        centers.remove(&b);
        centers.insert(a, centroid(embeddings, &members(&group, a))?);
        steps.push(MergeStep {
            kept: a,
            absorbed: b,
            similarity: s.to_f64_lossy(),
        });
    }
    Ok((renumber(&group), steps))
}

/// Reduces a fitted model to exactly `k` topics by centroid merging and
/// re-describes the merged topics. Noise rows are untouched.
pub fn reduce_to_k<T: Scalar>(
    corpus: &PreparedCorpus<T>,
    model: &TopicModel<T>,
    k: usize,
    config: &TopicConfig,
) -> Result<(TopicModel<T>, Vec<MergeStep>)> {
    if k < 1 || k > model.n_topics() {
        return Err(Error::invalid(format!(
            "K = {k} is outside 1..={} topics",
            model.n_topics()
        )));
    }
    if k == model.n_topics() {
        return Ok((model.clone(), Vec::new()));
    }
    let (labels, steps) = merge_labels(&corpus.embeddings, &model.labels, k)?;
    Ok((represent(corpus, &labels, config)?, steps))
}
