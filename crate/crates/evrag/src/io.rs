//! Line-delimited JSON inputs, persisted indexes, scripted tables and output
//! writers.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use evrag_core::gateway::ScriptTable;
use evrag_core::{eval::validate_dataset, Corpus, Document, QaInstance, ScriptedBackend};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentRecord {
    pub doc_id: String,
    #[serde(default)]
    pub title: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingRecord {
    pub doc_id: String,
    pub vector: Vec<f64>,
}

/// Reads one JSON value per non-blank line.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e))?);
    }
    Ok(out)
}

pub fn read_documents(path: &Path) -> Result<Vec<Document>> {
    Ok(read_jsonl::<DocumentRecord>(path)?
        .into_iter()
        .map(|r| Document::new(r.doc_id, r.title, r.text))
        .collect())
}

/// Vectors keyed by doc_id; a repeated id is an error.
pub fn read_embeddings(path: &Path) -> Result<BTreeMap<String, Vec<f64>>> {
    let mut out = BTreeMap::new();
    for (i, rec) in read_jsonl::<EmbeddingRecord>(path)?.into_iter().enumerate() {
        if out.contains_key(&rec.doc_id) {
            return Err(Error::parse(
                path,
                i + 1,
                format!("duplicate embedding for doc_id {:?}", rec.doc_id),
            ));
        }
        out.insert(rec.doc_id, rec.vector);
    }
    Ok(out)
}

/// Loads documents (and optionally embeddings) and builds the indexes.
pub fn ingest_corpus(source: &Path, embedding_source: Option<&Path>) -> Result<Corpus> {
    let docs = read_documents(source)?;
    match embedding_source {
        None => Corpus::build(docs).map_err(|e| Error::Corpus {
            path: source.into(),
            source: e,
        }),
        Some(emb) => {
            let vectors = read_embeddings(emb)?;
            Corpus::build_with_embeddings(docs, vectors).map_err(|e| Error::Corpus {
                path: emb.into(),
                source: e,
            })
        }
    }
}

pub fn save_index(corpus: &Corpus, path: &Path) -> Result<()> {
    write_json(path, corpus)
}

/// Loads a persisted index and verifies it against its documents.
pub fn load_index(path: &Path) -> Result<Corpus> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let corpus: Corpus = serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e))?;
    corpus.restore().map_err(|e| Error::Corpus {
        path: path.into(),
        source: e,
    })
}

/// Loads a dataset and checks qid uniqueness and gold presence.
pub fn read_dataset(path: &Path) -> Result<Vec<QaInstance>> {
    let data: Vec<QaInstance> = read_jsonl(path)?;
    if data.is_empty() {
        return Err(Error::Dataset {
            path: path.into(),
            source: evrag_core::eval::EvalError::Empty,
        });
    }
    validate_dataset(&data).map_err(|e| Error::Dataset {
        path: path.into(),
        source: e,
    })?;
    Ok(data)
}

pub fn read_script_table(path: &Path) -> Result<ScriptTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e))
}

pub fn load_scripted_backend(path: &Path) -> Result<ScriptedBackend> {
    read_script_table(path).map(ScriptedBackend::from)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("values serialize");
    text.push('\n');
    create_parent(path)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_jsonl<'a, T: Serialize + 'a>(path: &Path, rows: impl IntoIterator<Item = &'a T>) -> Result<()> {
    create_parent(path)?;
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for row in rows {
        serde_json::to_writer(&mut w, row).expect("values serialize");
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub(crate) fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir).map_err(|e| Error::io(dir, e)),
        _ => Ok(()),
    }
}
