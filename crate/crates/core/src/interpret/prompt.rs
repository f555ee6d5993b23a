//! Prompt templates and rendering.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const KEYWORDS: &str = "[KEYWORDS]";
pub const REPR_DOCS: &str = "[REPR_DOCS]";

/// Representative documents are cut to this many characters.
pub const DOC_CHAR_LIMIT: usize = 2000;

pub const LABEL_TEMPLATE: &str = "Sei un esperto di giurisprudenza e di diritto italiano.
Rispondi in modo professionale alle richieste.
Ho un topic descritto dalle seguenti keywords: [KEYWORDS]
In questo topic, i seguenti documenti sono un sottoinsieme piccolo ma rappresentativo di tutti i documenti dell'argomento: [REPR_DOCS].
Sulla base delle informazioni di cui sopra, fornisci una breve label a questo topic.
Assicurati di riportare solo la label e nient'altro.";

pub const SUMMARY_TEMPLATE: &str = "Sei un esperto di giurisprudenza e di diritto italiano.
Rispondi in modo professionale alle richieste.
Ho un topic descritto dalle seguenti keywords: [KEYWORDS]
In questo topic, i seguenti documenti sono un sottoinsieme piccolo ma rappresentativo di tutti i documenti dell'argomento: [REPR_DOCS].
Sulla base delle informazioni di cui sopra, fornisci una descrizione di questo topic nel seguente formato:
topic: <descrizione>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Label,
    Summary,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Label => "label",
            TaskKind::Summary => "summary",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "label" => Ok(TaskKind::Label),
            "summary" => Ok(TaskKind::Summary),
            other => Err(Error::invalid(format!("unknown task {other:?}; expected label or summary"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTask {
    pub kind: TaskKind,
    template: String,
}

impl PromptTask {
    /// Each placeholder must occur exactly once.
    pub fn new(kind: TaskKind, template: impl Into<String>) -> Result<Self> {
        let template = template.into();
        for p in [KEYWORDS, REPR_DOCS] {
            let n = template.matches(p).count();
            if n != 1 {
                return Err(Error::invalid(format!(
                    "{kind} template must contain {p} exactly once, found {n}"
                )));
            }
        }
        Ok(PromptTask { kind, template })
    }

    pub fn default_for(kind: TaskKind) -> Self {
        let t = match kind {
            TaskKind::Label => LABEL_TEMPLATE,
            TaskKind::Summary => SUMMARY_TEMPLATE,
        };
        PromptTask {
            kind,
            template: t.to_string(),
        }
    }

    pub fn template(&self) -> &str {
        &self.template
    }
}

fn truncate_chars(s: &str, n: usize) -> &str {
    match s.char_indices().nth(n) {
        Some((i, _)) => &s[..i],
        None => s,
    }
}

/// Keywords joined by ", "; documents as "- " lines.
pub fn render_prompt(task: &PromptTask, keywords: &[String], docs: &[String]) -> Result<String> {
    if keywords.is_empty() {
        return Err(Error::invalid("prompt needs at least one keyword"));
    }
    if docs.is_empty() {
        return Err(Error::invalid("prompt needs at least one representative document"));
    }
    let kw = keywords.join(", ");
    let dl = docs
        .iter()
        .map(|d| format!("- {}", truncate_chars(d.trim(), DOC_CHAR_LIMIT)))
        .collect::<Vec<_>>()
        .join("\n");
    // split first so placeholder text inside keywords or docs is never re-expanded
    let (head, rest) = task.template.split_once(KEYWORDS).expect("validated template");
    let rendered = if let Some((mid, tail)) = rest.split_once(REPR_DOCS) {
        format!("{head}{kw}{mid}{dl}{tail}")
    } else {
        let (h2, t2) = head.split_once(REPR_DOCS).expect("validated template");
        format!("{h2}{dl}{t2}{kw}{rest}")
    };
    Ok(rendered)
}

/// Labels longer than this are flagged nonconforming.
pub const LABEL_MAX_CHARS: usize = 120;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parsed {
    pub text: String,
    pub conforming: bool,
}

fn strip_quotes(s: &str) -> &str {
    let pairs = [('"', '"'), ('\'', '\''), ('«', '»'), ('“', '”'), ('`', '`')];
    for (a, b) in pairs {
        if s.chars().count() >= 2 && s.starts_with(a) && s.ends_with(b) {
            return s[a.len_utf8()..s.len() - b.len_utf8()].trim();
        }
    }
    s
}

/// First non-empty line, trimmed and unquoted.
pub fn parse_label(raw: &str) -> Result<Parsed> {
    let line = raw
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty())
        .ok_or_else(|| Error::invalid("empty completion"))?;
    let text = strip_quotes(line).to_string();
    let conforming = text.chars().count() <= LABEL_MAX_CHARS;
    Ok(Parsed { text, conforming })
}

/// Text after the first "topic:" marker (case-insensitive); without a marker
/// the whole trimmed text, flagged nonconforming.
pub fn parse_summary(raw: &str) -> Result<Parsed> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(Error::invalid("empty completion"));
    }
    let marker = trimmed
        .char_indices()
        .map(|(i, _)| i)
        .find(|&i| trimmed[i..].get(..6).is_some_and(|m| m.eq_ignore_ascii_case("topic:")));
    match marker {
        Some(i) => {
            let text = strip_quotes(trimmed[i + "topic:".len()..].trim()).to_string();
            let conforming = !text.is_empty();
            Ok(Parsed { text, conforming })
        }
        None => Ok(Parsed {
            text: trimmed.to_string(),
            conforming: false,
        }),
    }
}

pub fn parse_output(kind: TaskKind, raw: &str) -> Result<Parsed> {
    match kind {
        TaskKind::Label => parse_label(raw),
        TaskKind::Summary => parse_summary(raw),
    }
}
