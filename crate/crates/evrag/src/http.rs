//! OpenAI-compatible chat and embedding clients, and the prompt-rendering
//! transport that sits between them and the gateway.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use evrag_core::gateway::{canonical_json, TaskRequest};
use evrag_core::{EmbeddingProvider, Transport, TransportError};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChatMessage {
    pub role: &'static str,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: "system",
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: "user",
            content: content.into(),
        }
    }
}

/// One chat-completion round trip returning the assistant text.
pub trait ChatClient: Send + Sync {
    fn chat(&self, messages: &[ChatMessage]) -> Result<String, TransportError>;
}

#[derive(Debug, Clone)]
pub struct HttpSettings {
    /// Base URL, e.g. `https://api.openai.com/v1`.
    pub endpoint: String,
    pub model: String,
    pub api_key: Option<String>,
    pub temperature: f64,
    pub timeout: Duration,
}

fn agent(timeout: Duration) -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .http_status_as_error(false)
        .build()
        .into()
}

fn unavailable(message: impl Into<String>, retryable: bool) -> TransportError {
    TransportError::Unavailable {
        message: message.into(),
        retryable,
    }
}

/// POSTs `body` and returns the parsed JSON reply. 408, 409, 429 and 5xx are
/// retryable, as are connection failures; other statuses are not.
fn post_json(agent: &ureq::Agent, url: &str, api_key: Option<&str>, body: &Value) -> Result<Value, TransportError> {
    let mut req = agent.post(url).header("Content-Type", "application/json");
    if let Some(key) = api_key {
        req = req.header("Authorization", format!("Bearer {key}"));
    }
    let mut resp = req
        .send(serde_json::to_vec(body).expect("request serializes"))
        .map_err(|e| unavailable(format!("{url}: {e}"), true))?;
    let status = resp.status().as_u16();
    let text = resp
        .body_mut()
        .read_to_string()
        .map_err(|e| unavailable(format!("{url}: reading body: {e}"), true))?;
    if !(200..300).contains(&status) {
        let retryable = matches!(status, 408 | 409 | 429) || status >= 500;
        let snippet: String = text.chars().take(300).collect();
        return Err(unavailable(format!("{url}: HTTP {status}: {snippet}"), retryable));
    }
    serde_json::from_str(&text).map_err(|e| unavailable(format!("{url}: response is not JSON: {e}"), false))
}

/// Chat client for the `/chat/completions` route.
pub struct OpenAiChat {
    agent: ureq::Agent,
    settings: HttpSettings,
}

impl OpenAiChat {
    pub fn new(settings: HttpSettings) -> Self {
        Self {
            agent: agent(settings.timeout),
            settings,
        }
    }
}

impl ChatClient for OpenAiChat {
    fn chat(&self, messages: &[ChatMessage]) -> Result<String, TransportError> {
        let s = &self.settings;
        let url = format!("{}/chat/completions", s.endpoint.trim_end_matches('/'));
        let body = json!({
            "model": s.model,
            "messages": messages,
            "temperature": s.temperature,
        });
        let reply = post_json(&self.agent, &url, s.api_key.as_deref(), &body)?;
        reply
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_owned)
            .ok_or_else(|| unavailable(format!("{url}: reply has no choices[0].message.content"), false))
    }
}

/// Query embedder backed by the `/embeddings` route.
pub struct HttpEmbedder {
    agent: ureq::Agent,
    settings: HttpSettings,
    dim: usize,
}

impl HttpEmbedder {
    pub fn new(settings: HttpSettings, dim: usize) -> Self {
        Self {
            agent: agent(settings.timeout),
            settings,
            dim,
        }
    }
}

impl EmbeddingProvider for HttpEmbedder {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, String> {
        let s = &self.settings;
        let url = format!("{}/embeddings", s.endpoint.trim_end_matches('/'));
        let reply = post_json(
            &self.agent,
            &url,
            s.api_key.as_deref(),
            &json!({ "model": s.model, "input": text }),
        )
        .map_err(|e| e.to_string())?;
        let v: Vec<f64> = reply
            .pointer("/data/0/embedding")
            .and_then(Value::as_array)
            .ok_or("reply has no data[0].embedding")?
            .iter()
            .map(|x| x.as_f64().ok_or("embedding entries must be numbers"))
            .collect::<Result<_, _>>()?;
        if v.len() != self.dim {
            return Err(format!(
                "{url}: embedding has dimension {}, expected {}",
                v.len(),
                self.dim
            ));
        }
        Ok(v)
    }
}

/// Instruction templates keyed by template id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSet {
    templates: BTreeMap<String, String>,
}

impl Default for PromptSet {
    fn default() -> Self {
        Self::builtin()
    }
}

impl PromptSet {
    /// The templates shipped with the crate, one per task.
    pub fn builtin() -> Self {
        let files = [
            ("decompose.v1", include_str!("../assets/prompts/decompose.v1.txt")),
            ("extract_sru.v1", include_str!("../assets/prompts/extract_sru.v1.txt")),
            (
                "assess_evidence.v1",
                include_str!("../assets/prompts/assess_evidence.v1.txt"),
            ),
            (
                "augment_query.v1",
                include_str!("../assets/prompts/augment_query.v1.txt"),
            ),
            (
                "judge_abstention.v1",
                include_str!("../assets/prompts/judge_abstention.v1.txt"),
            ),
            (
                "synthesize_answer.v1",
                include_str!("../assets/prompts/synthesize_answer.v1.txt"),
            ),
        ];
        Self {
            templates: files.into_iter().map(|(k, v)| (k.to_owned(), v.to_owned())).collect(),
        }
    }

    /// Overrides templates with every `<template_id>.txt` found in `dir`.
    pub fn with_overrides(mut self, dir: &Path) -> Result<Self> {
        let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        for entry in entries {
            let path = entry.map_err(|e| Error::io(dir, e))?.path();
            if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let Some(id) = path.file_stem().and_then(|s| s.to_str()) else {
                continue;
            };
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            self.templates.insert(id.to_owned(), text);
        }
        Ok(self)
    }

    pub fn get(&self, template_id: &str) -> Option<&str> {
        self.templates.get(template_id).map(String::as_str)
    }

    /// Builds the message list for one request: the instruction template as
    /// the system message, the payload as the user message, and the
    /// rejection note of a previous attempt when re-asking.
    pub fn render(&self, request: &TaskRequest, feedback: Option<&str>) -> Result<Vec<ChatMessage>, TransportError> {
        let template = self
            .get(&request.template_id)
            .ok_or_else(|| unavailable(format!("no prompt template {:?}", request.template_id), false))?;
        let mut user = format!("Input ({}):\n{}", request.kind, canonical_json(&request.payload));
        if let Some(note) = feedback {
            user.push_str("\n\n");
            user.push_str(note);
        }
        Ok(vec![ChatMessage::system(template.trim_end()), ChatMessage::user(user)])
    }
}

struct InFlight {
    limit: usize,
    active: Mutex<usize>,
    freed: Condvar,
}

struct Permit<'a>(&'a InFlight);

impl InFlight {
    fn acquire(&self) -> Permit<'_> {
        let mut n = self.active.lock().expect("in-flight counter");
        while *n >= self.limit {
            n = self.freed.wait(n).expect("in-flight counter");
        }
        *n += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.active.lock().expect("in-flight counter") -= 1;
        self.0.freed.notify_one();
    }
}

/// Gateway transport over a chat model. Caps concurrent requests and backs
/// off on retryable transport failures before surfacing them.
pub struct LlmTransport<C> {
    client: C,
    prompts: PromptSet,
    in_flight: InFlight,
    transport_retries: u32,
    backoff: Duration,
}

impl<C: ChatClient> LlmTransport<C> {
    pub fn new(client: C, prompts: PromptSet, max_in_flight: usize) -> Self {
        Self {
            client,
            prompts,
            in_flight: InFlight {
                limit: max_in_flight.max(1),
                active: Mutex::new(0),
                freed: Condvar::new(),
            },
            transport_retries: 2,
            backoff: Duration::from_millis(500),
        }
    }

    /// Extra attempts on retryable failures, with exponential backoff from `backoff`.
    pub fn with_transport_retries(mut self, retries: u32, backoff: Duration) -> Self {
        self.transport_retries = retries;
        self.backoff = backoff;
        self
    }

    pub fn client(&self) -> &C {
        &self.client
    }
}

impl<C: ChatClient> Transport for LlmTransport<C> {
    fn complete(&self, request: &TaskRequest, feedback: Option<&str>) -> Result<String, TransportError> {
        let messages = self.prompts.render(request, feedback)?;
        let mut attempt = 0;
        loop {
            let result = {
                let _permit = self.in_flight.acquire();
                self.client.chat(&messages)
            };
            match result {
                Err(e) if e.is_retryable() && attempt < self.transport_retries => {
                    std::thread::sleep(self.backoff * 2u32.saturating_pow(attempt));
                    attempt += 1;
                }
                other => return other,
            }
        }
    }
}
