//! BERTScore precision, recall and F1 over token embeddings.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::embed_store::{cosine_similarity, read_embeddings, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::report::MetricReport;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BertScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Cosine similarities, rows = candidate tokens, columns = reference tokens.
pub fn similarity_matrix<T: Scalar>(candidate: &EmbeddingMatrix<T>, reference: &EmbeddingMatrix<T>) -> Result<Vec<Vec<T>>> {
    if candidate.n_dims() != reference.n_dims() {
        return Err(Error::invalid(format!(
            "token dimensions differ: candidate {} vs reference {}",
            candidate.n_dims(),
            reference.n_dims()
        )));
    }
    candidate
        .rows()
        .map(|c| reference.rows().map(|r| cosine_similarity(c, r)).collect())
        .collect()
}

/// `P = mean_i max_j s_ij`, `R = mean_j max_i s_ij`, `F1 = 2PR/(P+R)` (0 when P+R = 0).
pub fn bertscore<T: Scalar>(candidate: &EmbeddingMatrix<T>, reference: &EmbeddingMatrix<T>) -> Result<BertScore> {
    let s = similarity_matrix(candidate, reference)?;
    let (m, n) = (candidate.n_rows(), reference.n_rows());
    let neg = T::neg_infinity();
    let p: T = s.iter().map(|row| row.iter().fold(neg, |a, &b| a.max(b))).sum::<T>() / T::of_usize(m);
    let r: T = (0..n).map(|j| s.iter().fold(neg, |a, row| a.max(row[j]))).sum::<T>() / T::of_usize(n);
    let (p, r) = (p.to_f64_lossy(), r.to_f64_lossy());
    let f1 = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    Ok(BertScore {
        precision: p,
        recall: r,
        f1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRow {
    pub system: String,
    pub topic_id: String,
    pub candidate_emb_path: PathBuf,
    pub reference_emb_path: PathBuf,
}

/// Reads the manifest CSV; relative paths resolve against the manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>> {
    let base = path.parent().unwrap_or(Path::new("."));
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    r.deserialize::<ManifestRow>()
        .enumerate()
        .map(|(i, row)| {
            let mut row = row.map_err(|e| Error::parse(format!("{}:{}", path.display(), i + 2), e.to_string()))?;
            for p in [&mut row.candidate_emb_path, &mut row.reference_emb_path] {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
            Ok(row)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScore {
    pub system: String,
    pub topic_id: String,
    pub score: BertScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchReport {
    pub pairs: Vec<PairScore>,
    /// Mean per system.
    pub systems: BTreeMap<String, BertScore>,
}

impl BatchReport {
    pub fn to_metric_report(&self) -> MetricReport {
        let mut r = MetricReport::default();
        for (sys, s) in &self.systems {
            r = r
                .metric(&format!("{sys}.precision"), s.precision)
                .metric(&format!("{sys}.recall"), s.recall)
                .metric(&format!("{sys}.f1"), s.f1);
        }
        r.setting("pairs", &self.pairs.len().to_string())
    }
}

/// Arithmetic means of the per-pair scores of each system.
pub fn aggregate(pairs: Vec<PairScore>) -> BatchReport {
    let mut sums: BTreeMap<String, (f64, f64, f64, usize)> = BTreeMap::new();
    for p in &pairs {
        let e = sums.entry(p.system.clone()).or_default();
        e.0 += p.score.precision;
        e.1 += p.score.recall;
        e.2 += p.score.f1;
        e.3 += 1;
    }
    let systems = sums
        .into_iter()
        .map(|(k, (p, r, f, n))| {
            let n = n as f64;
            (
                k,
                BertScore {
                    precision: p / n,
                    recall: r / n,
                    f1: f / n,
                },
            )
        })
        .collect();
    BatchReport { pairs, systems }
}

pub fn batch_report(rows: &[ManifestRow]) -> Result<BatchReport> {
    let pairs = rows
        .iter()
        .map(|row| {
            for p in [&row.candidate_emb_path, &row.reference_emb_path] {
                if !p.exists() {
                    return Err(Error::io(
                        p,
                        std::io::Error::new(std::io::ErrorKind::NotFound, "embedding file listed in manifest not found"),
                    ));
                }
            }
            let c = read_embeddings::<f32>(&row.candidate_emb_path)?;
            let r = read_embeddings::<f32>(&row.reference_emb_path)?;
            Ok(PairScore {
                system: row.system.clone(),
                topic_id: row.topic_id.clone(),
                score: bertscore(&c, &r)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(aggregate(pairs))
}
