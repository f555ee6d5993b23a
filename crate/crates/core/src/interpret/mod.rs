//! Topic labels and summaries from a chat-completion endpoint.

pub mod client;
pub mod prompt;

use std::collections::HashSet;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use client::{expand_env, request_body, request_completion, GenerationParams, ProviderConfig};
pub use prompt::{
    parse_label, parse_output, parse_summary, render_prompt, Parsed, PromptTask, TaskKind, LABEL_TEMPLATE,
    SUMMARY_TEMPLATE,
};

use crate::error::{Error, Result};
use crate::io;
use crate::topic_rep::Topic;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InterpretRecord {
    pub provider: String,
    pub task: TaskKind,
    pub topic_id: i64,
    pub prompt_sha256: String,
    pub output: String,
    pub conforming: bool,
}

pub fn prompt_sha256(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

/// A rendered prompt for one topic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopicPrompt {
    pub topic_id: i64,
    pub prompt: String,
    pub sha256: String,
}

/// Prompts for every non-noise topic; `doc_text` maps segment ids to text.
pub fn build_prompts<F: Fn(&str) -> Option<String>>(topics: &[Topic], task: &PromptTask, doc_text: F) -> Result<Vec<TopicPrompt>> {
    topics
        .iter()
        .filter(|t| t.id >= 0)
        .map(|t| {
            let docs = t
                .representative_docs
                .iter()
                .map(|id| doc_text(id).ok_or_else(|| Error::invalid(format!("representative segment {id} not in corpus"))))
                .collect::<Result<Vec<_>>>()?;
            let prompt = render_prompt(task, &t.terms(), &docs)?;
            Ok(TopicPrompt {
                topic_id: t.id,
                sha256: prompt_sha256(&prompt),
                prompt,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InterpretSummary {
    pub requested: usize,
    pub skipped: usize,
    pub failed: Vec<(i64, String)>,
}

/// Sends each prompt not already answered in `results` (matched on
/// provider, task, topic and prompt hash) and appends the new records in
/// topic order. At most `provider.parallelism` requests run at once.
pub fn run_prompts(provider: &ProviderConfig, task: TaskKind, prompts: &[TopicPrompt], results: &Path) -> Result<InterpretSummary> {
    provider.validate()?;
    let done: HashSet<(String, TaskKind, i64, String)> = if results.exists() {
        io::read_jsonl::<InterpretRecord>(results)?
            .into_iter()
            .map(|r| (r.provider, r.task, r.topic_id, r.prompt_sha256))
            .collect()
    } else {
        HashSet::new()
    };
    let todo: Vec<&TopicPrompt> = prompts
        .iter()
        .filter(|p| !done.contains(&(provider.name.clone(), task, p.topic_id, p.sha256.clone())))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(provider.parallelism)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let params = provider.params(task);
    let outcomes: Vec<(i64, Result<InterpretRecord>)> = pool.install(|| {
        todo.par_iter()
            .map(|p| {
                let rec = request_completion(provider, &p.prompt, &params).and_then(|raw| {
                    let parsed = parse_output(task, &raw)?;
                    Ok(InterpretRecord {
                        provider: provider.name.clone(),
                        task,
                        topic_id: p.topic_id,
                        prompt_sha256: p.sha256.clone(),
                        output: parsed.text,
                        conforming: parsed.conforming,
                    })
                });
                (p.topic_id, rec)
            })
            .collect()
    });
    let mut summary = InterpretSummary {
        requested: todo.len(),
        skipped: prompts.len() - todo.len(),
        failed: Vec::new(),
    };
    for (topic, rec) in outcomes {
        match rec {
            Ok(r) => io::append_jsonl(results, &r)?,
            Err(e) => summary.failed.push((topic, e.to_string())),
        }
    }
    Ok(summary)
}
