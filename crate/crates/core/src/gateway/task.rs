use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::pool::EvidencePool;
use crate::sru::{RelevanceLabel, Sru};

/// The six LLM-mediated tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Decompose,
    ExtractSru,
    AssessEvidence,
    AugmentQuery,
    JudgeAbstention,
    SynthesizeAnswer,
}

impl TaskKind {
    pub const ALL: [TaskKind; 6] = [
        Self::Decompose,
        Self::ExtractSru,
        Self::AssessEvidence,
        Self::AugmentQuery,
        Self::JudgeAbstention,
        Self::SynthesizeAnswer,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Decompose => "decompose",
            Self::ExtractSru => "extract_sru",
            Self::AssessEvidence => "assess_evidence",
            Self::AugmentQuery => "augment_query",
            Self::JudgeAbstention => "judge_abstention",
            Self::SynthesizeAnswer => "synthesize_answer",
        }
    }

    /// Template id used when none is configured.
    pub fn default_template_id(self) -> &'static str {
        match self {
            Self::Decompose => "decompose.v1",
            Self::ExtractSru => "extract_sru.v1",
            Self::AssessEvidence => "assess_evidence.v1",
            Self::AugmentQuery => "augment_query.v1",
            Self::JudgeAbstention => "judge_abstention.v1",
            Self::SynthesizeAnswer => "synthesize_answer.v1",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One typed request to the language model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRequest {
    pub kind: TaskKind,
    pub payload: Value,
    pub template_id: String,
}

impl TaskRequest {
    pub fn new(kind: TaskKind, payload: Value) -> Self {
        Self {
            kind,
            payload,
            template_id: kind.default_template_id().to_string(),
        }
    }

    /// Hex SHA-256 over the task name and the canonical payload. Object key
    /// order does not affect the digest; the template id is not included.
    pub fn digest(&self) -> String {
        payload_digest(self.kind, &self.payload)
    }

    pub fn str_field(&self, key: &str) -> Option<&str> {
        self.payload.get(key).and_then(Value::as_str)
    }
}

pub fn payload_digest(kind: TaskKind, payload: &Value) -> String {
    let mut text = String::new();
    write_canonical(payload, &mut text);
    let mut hasher = Sha256::new();
    hasher.update(kind.as_str().as_bytes());
    hasher.update(b"\n");
    hasher.update(text.as_bytes());
    let out = hasher.finalize();
    let mut hex = String::with_capacity(out.len() * 2);
    for b in out.iter() {
        let _ = fmt::Write::write_fmt(&mut hex, format_args!("{b:02x}"));
    }
    hex
}

/// Compact JSON with object keys sorted at every level.
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_canonical(value, &mut out);
    out
}

fn write_canonical(value: &Value, out: &mut String) {
    match value {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_canonical(&map[k], out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, v) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(v, out);
            }
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}

/// Informational gaps, conflicts and negative constraints found in a pool.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct DeficiencyReport {
    pub sufficient: bool,
    #[serde(default)]
    pub gaps: Vec<String>,
    #[serde(default)]
    pub conflicts: Vec<String>,
    #[serde(default)]
    pub negative_constraints: Vec<String>,
    #[serde(default)]
    pub rationale: String,
}

impl DeficiencyReport {
    pub fn validate(&self) -> Result<(), String> {
        if self.sufficient && !(self.gaps.is_empty() && self.conflicts.is_empty()) {
            return Err("a sufficient verdict must not list gaps or conflicts".into());
        }
        let blank = |v: &Vec<String>| v.iter().any(|s| s.trim().is_empty());
        if blank(&self.gaps) || blank(&self.conflicts) || blank(&self.negative_constraints) {
            return Err("deficiency entries must be non-empty strings".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstentionVerdict {
    pub answerable: bool,
    #[serde(default)]
    pub reason: String,
}

impl AbstentionVerdict {
    pub fn validate(&self) -> Result<(), String> {
        if !self.answerable && self.reason.trim().is_empty() {
            return Err("an unanswerable verdict needs a non-empty reason".into());
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct UnitView<'a> {
    doc_id: &'a str,
    subquery: &'a str,
    relevance: RelevanceLabel,
    summary: &'a str,
    evidence: Option<&'a str>,
    confidence: f64,
}

impl<'a> From<&'a Sru> for UnitView<'a> {
    fn from(u: &'a Sru) -> Self {
        Self {
            doc_id: u.source_doc_id(),
            subquery: u.subquery(),
            relevance: u.relevance(),
            summary: u.summary(),
            evidence: u.evidence(),
            confidence: u.confidence(),
        }
    }
}

#[derive(Serialize)]
struct RawView<'a> {
    doc_id: &'a str,
    text: &'a str,
}

/// What the model sees of a pool: positive and negative partitions, plus raw
/// text when structured extraction is disabled.
pub fn pool_view(pool: &EvidencePool) -> Value {
    let (positive, negative) = pool.partition();
    let mut map = Map::new();
    map.insert(
        "positive".into(),
        to_value(positive.into_iter().map(UnitView::from).collect::<Vec<_>>()),
    );
    map.insert(
        "negative".into(),
        to_value(negative.into_iter().map(UnitView::from).collect::<Vec<_>>()),
    );
    if pool.raw_units().len() > 0 {
        let raw: Vec<RawView<'_>> = pool
            .raw_units()
            .map(|r| RawView {
                doc_id: &r.source_doc_id,
                text: &r.text,
            })
            .collect();
        map.insert("raw".into(), to_value(raw));
    }
    Value::Object(map)
}

pub(crate) fn to_value<T: Serialize>(v: T) -> Value {
    serde_json::to_value(v).expect("payload types serialize infallibly")
}
