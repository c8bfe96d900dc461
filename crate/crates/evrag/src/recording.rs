use std::sync::Mutex;

use evrag_core::gateway::{extract_json, ScriptTable, TaskRequest};
use evrag_core::{ScriptedBackend, Transport, TransportError};
use serde_json::Value;

/// Wraps a transport and keeps the last reply per request, so a session can
/// be replayed later through a [`ScriptedBackend`].
pub struct RecordingTransport<T> {
    inner: T,
    log: Mutex<ScriptedBackend>,
}

impl<T> RecordingTransport<T> {
    pub fn new(inner: T) -> Self {
        Self {
            inner,
            log: Mutex::new(ScriptedBackend::new()),
        }
    }

    pub fn inner(&self) -> &T {
        &self.inner
    }

    pub fn table(&self) -> ScriptTable {
        self.log.lock().expect("recording log").to_table()
    }
}

impl<T: Transport> Transport for RecordingTransport<T> {
    fn complete(&self, request: &TaskRequest, feedback: Option<&str>) -> Result<String, TransportError> {
        let text = self.inner.complete(request, feedback)?;
        let value = extract_json(&text).unwrap_or_else(|_| Value::String(text.clone()));
        self.log.lock().expect("recording log").insert(request, value);
        Ok(text)
    }
}
