//! Checks applied to files produced by the external model adapters.
//!
//! Each check returns every problem it finds instead of stopping at the first,
//! so a bad adapter run can be diagnosed in one pass. An empty list means the
//! file is usable as-is.

use std::collections::HashMap;

use crate::anonymize::EntitySpan;
use crate::corpus::Segment;
use crate::embed_store::EmbeddingMatrix;
use crate::scalar::Scalar;

fn row_problems<T: Scalar>(m: &EmbeddingMatrix<T>, what: &str, out: &mut Vec<String>) {
    for (i, row) in m.rows().enumerate() {
        if row.iter().any(|v| !v.is_finite()) {
            out.push(format!("{what} row {i}: non-finite value"));
            continue;
        }
        let norm2: f64 = row.iter().map(|v| v.to_f64().unwrap_or(0.0).powi(2)).sum();
        if norm2 <= 0.0 {
            out.push(format!("{what} row {i}: zero norm"));
        }
    }
}

/// Segment embeddings: one row per segment in input order, ids matching, norms positive.
pub fn check_segment_embeddings<T: Scalar>(segments: &[Segment], emb: &EmbeddingMatrix<T>) -> Vec<String> {
    let mut out = Vec::new();
    if emb.n_rows() != segments.len() {
        out.push(format!("{} segments but {} embedding rows", segments.len(), emb.n_rows()));
    }
    if emb.n_dims() == 0 {
        out.push("embedding has zero dimensions".to_string());
    }
    for (i, (s, id)) in segments.iter().zip(emb.ids()).enumerate() {
        if &s.segment_id != id {
            out.push(format!("row {i}: id {id:?} but segment {:?}", s.segment_id));
        }
    }
    row_problems(emb, "segment", &mut out);
    out
}

/// Entity spans: known segment, non-empty in-bounds offsets, score in [0, 1].
pub fn check_spans(segments: &[Segment], spans: &[EntitySpan]) -> Vec<String> {
    let lens: HashMap<&str, usize> = segments
        .iter()
        .map(|s| (s.segment_id.as_str(), s.text.chars().count()))
        .collect();
    let mut out = Vec::new();
    for (i, s) in spans.iter().enumerate() {
        match lens.get(s.segment_id.as_str()) {
            None => out.push(format!("span {i}: unknown segment {:?}", s.segment_id)),
            Some(&len) => {
                if s.start >= s.end || s.end > len {
                    out.push(format!("span {i}: [{}, {}) outside text of length {len}", s.start, s.end));
                }
            }
        }
        if !(0.0..=1.0).contains(&s.score) {
            out.push(format!("span {i}: score {} outside [0, 1]", s.score));
        }
    }
    out
}

/// Token embeddings for one text: at least one token, finite, nonzero rows.
pub fn check_token_embeddings<T: Scalar>(emb: &EmbeddingMatrix<T>) -> Vec<String> {
    let mut out = Vec::new();
    if emb.n_rows() == 0 {
        out.push("no token rows".to_string());
    }
    if emb.n_dims() == 0 {
        out.push("token embedding has zero dimensions".to_string());
    }
    row_problems(emb, "token", &mut out);
    out
}
