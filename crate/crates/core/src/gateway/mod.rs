//! Task-typed interface to the language model.
//!
//! [`Gateway`] turns each reasoning step into a [`TaskRequest`], hands it to a
//! [`Transport`], and validates the reply against the task's schema. Replies
//! that fail validation are re-requested with the violation attached, up to
//! `max_schema_retries` times; nothing partially valid is ever returned.

mod scripted;
mod task;

use alloc::borrow::ToOwned;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde_json::{json, Value};
use thiserror::Error;

pub use scripted::{ScriptEntry, ScriptTable, ScriptedBackend};
pub use task::{canonical_json, payload_digest, pool_view, AbstentionVerdict, DeficiencyReport, TaskKind, TaskRequest};

use crate::corpus::Document;
use crate::pool::EvidencePool;
use crate::sru::{RelevanceLabel, Sru};

pub const DEFAULT_SCHEMA_RETRIES: u32 = 2;
pub const DEFAULT_MAX_SUBQUERIES: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransportError {
    #[error("no scripted response for task {task} with payload digest {digest}")]
    ScriptMiss { task: TaskKind, digest: String },
    #[error("backend unavailable: {message}")]
    Unavailable { message: String, retryable: bool },
}

impl TransportError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, Self::Unavailable { retryable: true, .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GatewayError {
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("{task} response failed schema validation after {attempts} attempt(s): {message}")]
    Schema {
        task: TaskKind,
        attempts: u32,
        message: String,
    },
    #[error("contract violation in {task}: {message}")]
    Contract { task: TaskKind, message: String },
}

/// Produces the raw text reply for a request. `feedback` carries the reason
/// the previous reply was rejected, when re-asking.
pub trait Transport: Send + Sync {
    fn complete(&self, request: &TaskRequest, feedback: Option<&str>) -> Result<String, TransportError>;
}

impl<T: Transport + ?Sized> Transport for &T {
    fn complete(&self, request: &TaskRequest, feedback: Option<&str>) -> Result<String, TransportError> {
        (**self).complete(request, feedback)
    }
}

impl<T: Transport + ?Sized> Transport for alloc::boxed::Box<T> {
    fn complete(&self, request: &TaskRequest, feedback: Option<&str>) -> Result<String, TransportError> {
        (**self).complete(request, feedback)
    }
}

impl<T: Transport + ?Sized> Transport for alloc::sync::Arc<T> {
    fn complete(&self, request: &TaskRequest, feedback: Option<&str>) -> Result<String, TransportError> {
        (**self).complete(request, feedback)
    }
}

/// A schema-validated reply.
#[derive(Debug, Clone, PartialEq)]
pub enum TaskResponse {
    SubQueries(Vec<String>),
    /// Extracted unit; `iteration_born` is 0 until the caller stamps it.
    Unit(Sru),
    Deficiency(DeficiencyReport),
    AugmentedQuery(String),
    Verdict(AbstentionVerdict),
    Answer(String),
}

#[derive(Debug, Clone)]
pub struct Gateway<T> {
    transport: T,
    max_schema_retries: u32,
}

impl<T: Transport> Gateway<T> {
    pub fn new(transport: T) -> Self {
        Self {
            transport,
            max_schema_retries: DEFAULT_SCHEMA_RETRIES,
        }
    }

    pub fn with_schema_retries(mut self, retries: u32) -> Self {
        self.max_schema_retries = retries;
        self
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    pub fn max_schema_retries(&self) -> u32 {
        self.max_schema_retries
    }

    /// Sends `request` and validates the reply, re-asking on schema failure
    /// and on retryable transport errors within the same attempt budget.
    pub fn complete_task(&self, request: &TaskRequest) -> Result<TaskResponse, GatewayError> {
        let attempts = self.max_schema_retries + 1;
        let mut feedback: Option<String> = None;
        let mut last_error = String::new();
        for attempt in 1..=attempts {
            let text = match self.transport.complete(request, feedback.as_deref()) {
                Ok(text) => text,
                Err(e) if e.is_retryable() && attempt < attempts => {
                    feedback = None;
                    last_error = e.to_string();
                    continue;
                }
                Err(e) => return Err(e.into()),
            };
            match extract_json(&text).and_then(|v| parse_response(request, v)) {
                Ok(resp) => return Ok(resp),
                Err(e) => {
                    feedback = Some(format!(
                        "Your previous reply was rejected: {e}. Reply again with a single JSON object matching the required schema."
                    ));
                    last_error = e;
                }
            }
        }
        Err(GatewayError::Schema {
            task: request.kind,
            attempts,
            message: last_error,
        })
    }

    pub fn decompose_question(&self, question: &str, n_max: usize) -> Result<Vec<String>, GatewayError> {
        let task = TaskKind::Decompose;
        if question.trim().is_empty() {
            return Err(contract(task, "question is empty"));
        }
        if n_max == 0 {
            return Err(contract(task, "n_max must be positive"));
        }
        let req = TaskRequest::new(task, json!({ "query": question, "n_max": n_max }));
        match self.complete_task(&req)? {
            TaskResponse::SubQueries(v) => Ok(v),
            _ => unreachable!("decompose yields sub-queries"),
        }
    }

    pub fn extract_sru(&self, subquery: &str, document: &Document, iteration: u32) -> Result<Sru, GatewayError> {
        let req = TaskRequest::new(
            TaskKind::ExtractSru,
            json!({
                "subquery": subquery,
                "doc_id": document.doc_id,
                "title": document.title,
                "text": document.text,
            }),
        );
        match self.complete_task(&req)? {
            TaskResponse::Unit(u) => Ok(u.born_at(iteration)),
            _ => unreachable!("extract_sru yields a unit"),
        }
    }

    pub fn assess_evidence(
        &self,
        anchor_question: &str,
        pool: &EvidencePool,
    ) -> Result<DeficiencyReport, GatewayError> {
        let task = TaskKind::AssessEvidence;
        check_anchor(task, anchor_question, pool)?;
        let req = TaskRequest::new(
            task,
            json!({ "question": anchor_question, "evidence": pool_view(pool) }),
        );
        match self.complete_task(&req)? {
            TaskResponse::Deficiency(r) => Ok(r),
            _ => unreachable!("assess_evidence yields a report"),
        }
    }

    /// Text transform only; the pool is borrowed immutably.
    pub fn augment_query(
        &self,
        anchor_question: &str,
        pool: &EvidencePool,
        report: &DeficiencyReport,
    ) -> Result<String, GatewayError> {
        let task = TaskKind::AugmentQuery;
        if report.sufficient {
            return Err(contract(task, "evidence already judged sufficient"));
        }
        check_anchor(task, anchor_question, pool)?;
        let req = TaskRequest::new(
            task,
            json!({
                "question": anchor_question,
                "evidence": pool_view(pool),
                "deficiencies": report,
            }),
        );
        match self.complete_task(&req)? {
            TaskResponse::AugmentedQuery(q) => Ok(q),
            _ => unreachable!("augment_query yields a query"),
        }
    }

    pub fn judge_abstention(
        &self,
        anchor_question: &str,
        pool: &EvidencePool,
    ) -> Result<AbstentionVerdict, GatewayError> {
        let task = TaskKind::JudgeAbstention;
        check_anchor(task, anchor_question, pool)?;
        let req = TaskRequest::new(
            task,
            json!({ "question": anchor_question, "evidence": pool_view(pool) }),
        );
        match self.complete_task(&req)? {
            TaskResponse::Verdict(v) => Ok(v),
            _ => unreachable!("judge_abstention yields a verdict"),
        }
    }

    /// The request carries only the anchor question and pool contents.
    pub fn synthesize_answer(&self, anchor_question: &str, pool: &EvidencePool) -> Result<String, GatewayError> {
        let task = TaskKind::SynthesizeAnswer;
        if pool.is_empty() {
            return Err(contract(task, "evidence pool is empty"));
        }
        check_anchor(task, anchor_question, pool)?;
        let req = TaskRequest::new(
            task,
            json!({ "question": anchor_question, "evidence": pool_view(pool) }),
        );
        match self.complete_task(&req)? {
            TaskResponse::Answer(a) => Ok(a),
            _ => unreachable!("synthesize_answer yields an answer"),
        }
    }
}

fn contract(task: TaskKind, message: &str) -> GatewayError {
    GatewayError::Contract {
        task,
        message: message.to_owned(),
    }
}

fn check_anchor(task: TaskKind, anchor: &str, pool: &EvidencePool) -> Result<(), GatewayError> {
    if pool.anchor_question() != anchor {
        return Err(contract(task, "pool was built for a different question"));
    }
    Ok(())
}

/// Parses a JSON value out of model text, tolerating code fences and prose
/// around a single object or array.
pub fn extract_json(text: &str) -> Result<Value, String> {
    let trimmed = text.trim();
    if let Ok(v) = serde_json::from_str::<Value>(trimmed) {
        return Ok(v);
    }
    let start = trimmed.find(['{', '[']);
    let end = trimmed.rfind(['}', ']']);
    if let (Some(s), Some(e)) = (start, end) {
        if s < e {
            if let Ok(v) = serde_json::from_str::<Value>(&trimmed[s..=e]) {
                return Ok(v);
            }
        }
    }
    Err("reply is not valid JSON".into())
}

/// Validates a reply against the schema of `request.kind`.
pub fn parse_response(request: &TaskRequest, value: Value) -> Result<TaskResponse, String> {
    match request.kind {
        TaskKind::Decompose => {
            let n_max = request.payload.get("n_max").and_then(Value::as_u64).unwrap_or(u64::MAX);
            let list = match &value {
                Value::Array(_) => &value,
                Value::Object(m) => m.get("sub_queries").ok_or("missing field `sub_queries`")?,
                _ => return Err("expected an object with `sub_queries`".into()),
            };
            let items = list.as_array().ok_or("`sub_queries` must be an array")?;
            if items.is_empty() {
                return Err("decomposition returned no sub-queries".into());
            }
            if items.len() as u64 > n_max {
                return Err(format!(
                    "decomposition returned {} sub-queries, at most {n_max} allowed",
                    items.len()
                ));
            }
            let mut out = Vec::with_capacity(items.len());
            for item in items {
                let s = item.as_str().ok_or("sub-queries must be strings")?.trim();
                if s.is_empty() {
                    return Err("sub-queries must be non-empty".into());
                }
                out.push(s.to_owned());
            }
            Ok(TaskResponse::SubQueries(out))
        }
        TaskKind::ExtractSru => {
            let obj = value.as_object().ok_or("expected a JSON object")?;
            let label_text = obj
                .get("relevance")
                .and_then(Value::as_str)
                .ok_or("missing string field `relevance`")?;
            let relevance = RelevanceLabel::parse(label_text)
                .ok_or_else(|| format!("relevance {label_text:?} is not one of Supportive, Contextual, Irrelevant"))?;
            let summary = obj
                .get("summary")
                .and_then(Value::as_str)
                .ok_or("missing string field `summary`")?;
            let evidence = match obj.get("evidence") {
                None | Some(Value::Null) => None,
                Some(Value::String(s)) if s.trim().is_empty() || s.trim().eq_ignore_ascii_case("null") => None,
                Some(Value::String(s)) => Some(s.trim().to_owned()),
                Some(_) => return Err("`evidence` must be a string or null".into()),
            };
            let confidence = obj
                .get("confidence")
                .and_then(Value::as_f64)
                .ok_or("missing numeric field `confidence`")?;
            let doc_id = request.str_field("doc_id").ok_or("request lacks doc_id")?;
            let subquery = request.str_field("subquery").unwrap_or_default();
            Sru::new(doc_id, subquery, relevance, summary.trim(), evidence, confidence, 0)
                .map(TaskResponse::Unit)
                .map_err(|e| e.to_string())
        }
        TaskKind::AssessEvidence => {
            let report: DeficiencyReport = serde_json::from_value(value).map_err(|e| e.to_string())?;
            report.validate()?;
            Ok(TaskResponse::Deficiency(report))
        }
        TaskKind::AugmentQuery => {
            let q = string_field(&value, "query")?;
            Ok(TaskResponse::AugmentedQuery(q))
        }
        TaskKind::JudgeAbstention => {
            let verdict: AbstentionVerdict = serde_json::from_value(value).map_err(|e| e.to_string())?;
            verdict.validate()?;
            Ok(TaskResponse::Verdict(verdict))
        }
        TaskKind::SynthesizeAnswer => Ok(TaskResponse::Answer(string_field(&value, "answer")?)),
    }
}

fn string_field(value: &Value, key: &str) -> Result<String, String> {
    let s = value
        .get(key)
        .and_then(Value::as_str)
        .ok_or_else(|| format!("missing string field `{key}`"))?
        .trim();
    if s.is_empty() {
        return Err(format!("`{key}` must be non-empty"));
    }
    Ok(s.to_owned())
}
