//! Chat-completion client with retry.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::prompt::TaskKind;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GenerationParams {
    pub max_new_tokens: Option<u32>,
    pub temperature: Option<f64>,
    pub repetition_penalty: Option<f64>,
}

impl GenerationParams {
    /// Settings for a locally hosted model: label (50, 0.1, 1.1), summary (2048, 0.1, 1.1).
    pub fn reference(kind: TaskKind) -> Self {
        GenerationParams {
            max_new_tokens: Some(match kind {
                TaskKind::Label => 50,
                TaskKind::Summary => 2048,
            }),
            temperature: Some(0.1),
            repetition_penalty: Some(1.1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_new_tokens == Some(0) {
            return Err(Error::invalid("max_new_tokens must be at least 1"));
        }
        if self.temperature.is_some_and(|t| !(t >= 0.0)) {
            return Err(Error::invalid("temperature must be non-negative"));
        }
        if self.repetition_penalty.is_some_and(|r| !(r > 0.0)) {
            return Err(Error::invalid("repetition_penalty must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProviderConfig {
    pub name: String,
    pub endpoint: String,
    pub model: String,
    /// `Header-Name: value`; `${VAR}` is replaced from the environment at request time.
    pub auth_header: Option<String>,
    pub label: GenerationParams,
    pub summary: GenerationParams,
    pub timeout: Duration,
    pub attempts: u32,
    pub backoff_base: Duration,
    pub parallelism: usize,
}

impl ProviderConfig {
    pub fn new(name: impl Into<String>, endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        ProviderConfig {
            name: name.into(),
            endpoint: endpoint.into(),
            model: model.into(),
            auth_header: None,
            label: GenerationParams::reference(TaskKind::Label),
            summary: GenerationParams::reference(TaskKind::Summary),
            timeout: Duration::from_secs(120),
            attempts: 3,
            backoff_base: Duration::from_secs(1),
            parallelism: 2,
        }
    }

    pub fn params(&self, kind: TaskKind) -> GenerationParams {
        match kind {
            TaskKind::Label => self.label,
            TaskKind::Summary => self.summary,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.endpoint.trim().is_empty() {
            return Err(Error::invalid(format!("provider {} has no endpoint", self.name)));
        }
        if self.attempts == 0 || self.parallelism == 0 {
            return Err(Error::invalid(format!(
                "provider {}: attempts and parallelism must be at least 1",
                self.name
            )));
        }
        self.label.validate()?;
        self.summary.validate()
    }
}

/// Replaces `${VAR}` with the variable's value; unset variables are an error.
pub fn expand_env(template: &str) -> Result<String> {
    let mut out = String::new();
    let mut rest = template;
    while let Some(i) = rest.find("${") {
        out.push_str(&rest[..i]);
        let after = &rest[i + 2..];
        let end = after
            .find('}')
            .ok_or_else(|| Error::invalid(format!("unterminated ${{ in {template:?}")))?;
        let var = &after[..end];
        let val = std::env::var(var).map_err(|_| Error::invalid(format!("environment variable {var} is not set")))?;
        out.push_str(&val);
        rest = &after[end + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

pub fn request_body(model: &str, prompt: &str, params: &GenerationParams) -> Value {
    let mut body = json!({
        "model": model,
        "messages": [{"role": "user", "content": prompt}],
    });
    let obj = body.as_object_mut().expect("object literal");
    if let Some(v) = params.max_new_tokens {
        obj.insert("max_tokens".into(), json!(v));
    }
    if let Some(v) = params.temperature {
        obj.insert("temperature".into(), json!(v));
    }
    if let Some(v) = params.repetition_penalty {
        obj.insert("repetition_penalty".into(), json!(v));
    }
    body
}

enum Attempt {
    Done(String),
    Retry(String),
    Fail(Error),
}

fn attempt(agent: &ureq::Agent, provider: &ProviderConfig, body: &Value) -> Attempt {
    let mut req = agent.post(&provider.endpoint).header("Content-Type", "application/json");
    if let Some(h) = &provider.auth_header {
        let expanded = match expand_env(h) {
            Ok(v) => v,
            Err(e) => return Attempt::Fail(e),
        };
        let Some((name, value)) = expanded.split_once(':') else {
            return Attempt::Fail(Error::invalid(format!(
                "auth_header of provider {} must look like \"Name: value\"",
                provider.name
            )));
        };
        req = req.header(name.trim(), value.trim());
    }
    let mut resp = match req.send_json(body) {
        Ok(r) => r,
        Err(e) => return Attempt::Retry(e.to_string()),
    };
    let status = resp.status().as_u16();
    if status == 429 || status >= 500 {
        return Attempt::Retry(format!("HTTP {status}"));
    }
    if !(200..300).contains(&status) {
        let text = resp.body_mut().read_to_string().unwrap_or_default();
        return Attempt::Fail(Error::Request(format!(
            "{} returned HTTP {status}: {}",
            provider.endpoint,
            text.chars().take(200).collect::<String>()
        )));
    }
    let value: Value = match resp.body_mut().read_json() {
        Ok(v) => v,
        Err(e) => return Attempt::Retry(format!("unreadable response: {e}")),
    };
    match value.pointer("/choices/0/message/content").and_then(Value::as_str) {
        Some(text) if !text.trim().is_empty() => Attempt::Done(text.to_string()),
        Some(_) => Attempt::Fail(Error::Request(format!("{} returned an empty completion", provider.endpoint))),
        None => Attempt::Fail(Error::Request(format!(
            "{} response has no choices[0].message.content",
            provider.endpoint
        ))),
    }
}

/// Single-turn chat completion. Transport errors, timeouts, 429 and 5xx are
/// retried with exponential backoff; the completion text is returned verbatim.
pub fn request_completion(provider: &ProviderConfig, prompt: &str, params: &GenerationParams) -> Result<String> {
    provider.validate()?;
    params.validate()?;
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(provider.timeout))
        .http_status_as_error(false)
        .build()
        .into();
    let body = request_body(&provider.model, prompt, params);
    let mut last = String::new();
    for i in 0..provider.attempts {
        if i > 0 {
            std::thread::sleep(provider.backoff_base * 2u32.pow(i - 1));
        }
        match attempt(&agent, provider, &body) {
            Attempt::Done(text) => return Ok(text),
            Attempt::Fail(e) => return Err(e),
            Attempt::Retry(why) => {
                log::warn!("{} attempt {} failed: {why}", provider.name, i + 1);
                last = why;
            }
        }
    }
    Err(Error::Request(format!(
        "{} failed after {} attempts: {last}",
        provider.endpoint, provider.attempts
    )))
}
