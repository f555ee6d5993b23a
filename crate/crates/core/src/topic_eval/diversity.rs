//! Topic diversity.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Unique words across topics divided by `K · N`.
pub fn topic_diversity(topics: &[Vec<String>]) -> Result<f64> {
    let k = topics.len();
    if k == 0 {
        return Err(Error::invalid("topic diversity needs at least one topic"));
    }
    let n = topics[0].len();
    if n == 0 {
        return Err(Error::invalid("topic word lists are empty"));
    }
    if let Some(i) = topics.iter().position(|t| t.len() != n) {
        return Err(Error::invalid(format!(
            "topic {i} has {} words, expected {n}",
            topics[i].len()
        )));
    }
    let unique: HashSet<&String> = topics.iter().flatten().collect();
    Ok(unique.len() as f64 / (k * n) as f64)
}

/// Cuts every list to the shortest list's length.
pub fn truncate_to_shortest(topics: &[Vec<String>]) -> Vec<Vec<String>> {
    let n = topics.iter().map(Vec::len).min().unwrap_or(0);
    topics.iter().map(|t| t[..n].to_vec()).collect()
}
