use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::task::{payload_digest, TaskKind, TaskRequest};
use super::{Transport, TransportError};

/// Replays canned replies keyed by `(task, payload digest)`. A request without
/// an entry fails; there is no fallback.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScriptedBackend {
    table: BTreeMap<(TaskKind, String), Value>,
    requests: BTreeMap<(TaskKind, String), Value>,
}

/// File form of a scripted table.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptTable {
    pub entries: Vec<ScriptEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptEntry {
    pub task: TaskKind,
    pub digest: String,
    /// The request payload, kept for readability; not used for lookup.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request: Option<Value>,
    pub response: Value,
}

impl ScriptedBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, request: &TaskRequest, response: Value) {
        let key = (request.kind, request.digest());
        self.requests.insert(key.clone(), request.payload.clone());
        self.table.insert(key, response);
    }

    pub fn insert_digest(&mut self, task: TaskKind, digest: impl Into<String>, response: Value) {
        self.table.insert((task, digest.into()), response);
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn lookup(&self, task: TaskKind, digest: &str) -> Option<&Value> {
        self.table.get(&(task, String::from(digest)))
    }

    /// Entries sorted by task then digest.
    pub fn to_table(&self) -> ScriptTable {
        ScriptTable {
            entries: self
                .table
                .iter()
                .map(|((task, digest), response)| ScriptEntry {
                    task: *task,
                    digest: digest.clone(),
                    request: self.requests.get(&(*task, digest.clone())).cloned(),
                    response: response.clone(),
                })
                .collect(),
        }
    }
}

impl From<ScriptTable> for ScriptedBackend {
    fn from(t: ScriptTable) -> Self {
        let mut b = Self::new();
        for e in t.entries {
            let digest = match &e.request {
                Some(payload) if e.digest.is_empty() => payload_digest(e.task, payload),
                _ => e.digest,
            };
            if let Some(req) = e.request {
                b.requests.insert((e.task, digest.clone()), req);
            }
            b.table.insert((e.task, digest), e.response);
        }
        b
    }
}

impl Transport for ScriptedBackend {
    fn complete(&self, request: &TaskRequest, _feedback: Option<&str>) -> Result<String, TransportError> {
        let digest = request.digest();
        match self.table.get(&(request.kind, digest.clone())) {
            Some(v) => Ok(serde_json::to_string(v).expect("JSON values serialize")),
            None => Err(TransportError::ScriptMiss {
                task: request.kind,
                digest,
            }),
        }
    }
}
