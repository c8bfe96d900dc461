//! Document corpus with a BM25 lexical index and an optional dense index
//! over precomputed, unit-normalized embeddings.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::tokenize;

/// BM25 term-frequency saturation.
pub const BM25_K1: f64 = 1.2;
/// BM25 length normalization.
pub const BM25_B: f64 = 0.75;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    #[serde(default)]
    pub title: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<f64>>,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, title: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            doc_id: doc_id.into(),
            title: title.into(),
            text: text.into(),
            embedding: None,
        }
    }

    /// Title and body, the text the lexical index sees.
    pub fn indexed_text(&self) -> String {
        let mut s = String::with_capacity(self.title.len() + self.text.len() + 1);
        s.push_str(&self.title);
        s.push(' ');
        s.push_str(&self.text);
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("corpus is empty")]
    Empty,
    #[error("duplicate doc_id {0:?}")]
    DuplicateId(String),
    #[error("document at position {0} has an empty doc_id")]
    EmptyId(usize),
    #[error("document {0:?} has empty text")]
    EmptyText(String),
    #[error("embedding dimension mismatch for {doc_id:?}: expected {expected}, found {found}")]
    DimensionMismatch {
        doc_id: String,
        expected: usize,
        found: usize,
    },
    #[error("embeddings cover some documents but not {0:?}")]
    MissingEmbedding(String),
    #[error("embedding for {0:?} refers to no document")]
    UnknownEmbedding(String),
    #[error("embedding for {0:?} has zero or non-finite norm")]
    DegenerateEmbedding(String),
    #[error("index is inconsistent with its documents: {0}")]
    Inconsistent(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RetrievalMode {
    #[default]
    Lexical,
    Dense,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RetrievalError {
    #[error("query is empty after tokenization")]
    EmptyQuery,
    #[error("k must be positive")]
    ZeroK,
    #[error("dense retrieval requested but the corpus has no dense index")]
    NoDenseIndex,
    #[error("dense retrieval requested without a query embedding provider")]
    NoEmbedder,
    #[error("query embedding has dimension {found}, corpus expects {expected}")]
    QueryDimension { expected: usize, found: usize },
    #[error("query embedding failed: {0}")]
    Embedding(String),
}

/// Maps query text into the corpus embedding space.
pub trait EmbeddingProvider: Sync {
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Result<Vec<f64>, String>;
}

/// Signed feature hashing of tokens into a fixed number of buckets.
///
/// Deterministic and dependency-free; meant for tests and demos, not for
/// retrieval quality.
#[derive(Debug, Clone, Copy)]
pub struct HashingEmbedder {
    dim: usize,
}

impl HashingEmbedder {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self { dim }
    }

    /// Unit-normalized embedding of `text`; the zero vector when it has no tokens.
    pub fn embed_text(&self, text: &str) -> Vec<f64> {
        let mut v = alloc::vec![0.0; self.dim];
        for tok in tokenize(text) {
            let h = crate::seed::mix64(crate::seed::label_hash(&tok));
            let bucket = (h % self.dim as u64) as usize;
            let sign = if (h >> 63) == 0 { 1.0 } else { -1.0 };
            v[bucket] += sign;
        }
        let norm = l2_norm(&v);
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }
}

impl EmbeddingProvider for HashingEmbedder {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, String> {
        Ok(self.embed_text(text))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    pub doc_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedDocuments {
    pub query: String,
    pub hits: Vec<Hit>,
    pub k_requested: usize,
}

impl RankedDocuments {
    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.hits.iter().map(|h| h.doc_id.as_str())
    }

    pub fn len(&self) -> usize {
        self.hits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Posting {
    doc: u32,
    tf: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct LexicalIndex {
    postings: BTreeMap<String, Vec<Posting>>,
    doc_lengths: Vec<u32>,
    avg_doc_length: f64,
}

impl LexicalIndex {
    fn build(documents: &[Document]) -> Self {
        let mut postings: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut doc_lengths = Vec::with_capacity(documents.len());
        for (i, doc) in documents.iter().enumerate() {
            let tokens = tokenize(&doc.indexed_text());
            doc_lengths.push(tokens.len() as u32);
            let mut tf: BTreeMap<String, u32> = BTreeMap::new();
            for t in tokens {
                *tf.entry(t).or_default() += 1;
            }
            for (term, count) in tf {
                postings.entry(term).or_default().push(Posting {
                    doc: i as u32,
                    tf: count,
                });
            }
        }
        let total: u64 = doc_lengths.iter().map(|&l| u64::from(l)).sum();
        let avg_doc_length = if documents.is_empty() {
            0.0
        } else {
            total as f64 / documents.len() as f64
        };
        Self {
            postings,
            doc_lengths,
            avg_doc_length,
        }
    }

    /// BM25 score of every document, indexed by corpus position. Each distinct
    /// query term counts once, in order of first appearance.
    fn score_all(&self, query_terms: &[String]) -> Vec<f64> {
        let n = self.doc_lengths.len() as f64;
        let mut scores = alloc::vec![0.0; self.doc_lengths.len()];
        for term in query_terms {
            let Some(postings) = self.postings.get(term) else {
                continue;
            };
            let df = postings.len() as f64;
            let idf = libm::log(1.0 + (n - df + 0.5) / (df + 0.5));
            for p in postings {
                let tf = f64::from(p.tf);
                let dl = f64::from(self.doc_lengths[p.doc as usize]);
                scores[p.doc as usize] +=
                    idf * (tf * (BM25_K1 + 1.0)) / (tf + BM25_K1 * (1.0 - BM25_B + BM25_B * dl / self.avg_doc_length));
            }
        }
        scores
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct DenseIndex {
    dim: usize,
}

/// An immutable, indexed document collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    documents: Vec<Document>,
    lexical: LexicalIndex,
    dense: Option<DenseIndex>,
    #[serde(skip)]
    positions: BTreeMap<String, usize>,
}

impl Corpus {
    /// Validates documents and builds the indexes. Embeddings are
    /// re-normalized to unit length; they must be present on all documents
    /// or on none.
    pub fn build(mut documents: Vec<Document>) -> Result<Self, CorpusError> {
        if documents.is_empty() {
            return Err(CorpusError::Empty);
        }
        let mut positions = BTreeMap::new();
        for (i, doc) in documents.iter().enumerate() {
            if doc.doc_id.is_empty() {
                return Err(CorpusError::EmptyId(i));
            }
            if doc.text.trim().is_empty() {
                return Err(CorpusError::EmptyText(doc.doc_id.clone()));
            }
            if positions.insert(doc.doc_id.clone(), i).is_some() {
                return Err(CorpusError::DuplicateId(doc.doc_id.clone()));
            }
        }

        let with_embedding = documents.iter().filter(|d| d.embedding.is_some()).count();
        let dense = if with_embedding == 0 {
            None
        } else {
            if let Some(missing) = documents.iter().find(|d| d.embedding.is_none()) {
                return Err(CorpusError::MissingEmbedding(missing.doc_id.clone()));
            }
            let dim = documents[0].embedding.as_ref().map_or(0, Vec::len);
            for doc in &mut documents {
                let v = doc.embedding.as_mut().expect("checked above");
                if v.len() != dim {
                    return Err(CorpusError::DimensionMismatch {
                        doc_id: doc.doc_id.clone(),
                        expected: dim,
                        found: v.len(),
                    });
                }
                let norm = l2_norm(v);
                if !(norm.is_finite() && norm > 0.0) {
                    return Err(CorpusError::DegenerateEmbedding(doc.doc_id.clone()));
                }
                v.iter_mut().for_each(|x| *x /= norm);
            }
            if dim == 0 {
                return Err(CorpusError::DegenerateEmbedding(documents[0].doc_id.clone()));
            }
            Some(DenseIndex { dim })
        };

        let lexical = LexicalIndex::build(&documents);
        Ok(Self {
            documents,
            lexical,
            dense,
            positions,
        })
    }

    /// Attaches embeddings keyed by doc_id and builds the corpus. Every
    /// document must receive a vector.
    pub fn build_with_embeddings(
        mut documents: Vec<Document>,
        mut embeddings: BTreeMap<String, Vec<f64>>,
    ) -> Result<Self, CorpusError> {
        for doc in &mut documents {
            match embeddings.remove(&doc.doc_id) {
                Some(v) => doc.embedding = Some(v),
                None if doc.embedding.is_none() => return Err(CorpusError::MissingEmbedding(doc.doc_id.clone())),
                None => {}
            }
        }
        if let Some(extra) = embeddings.into_keys().next() {
            return Err(CorpusError::UnknownEmbedding(extra));
        }
        Self::build(documents)
    }

    /// Rebuilds derived lookup tables after deserialization and verifies the
    /// persisted indexes against the documents.
    pub fn restore(mut self) -> Result<Self, CorpusError> {
        let rebuilt = Self::build(self.documents.clone())?;
        if rebuilt.lexical != self.lexical {
            return Err(CorpusError::Inconsistent("lexical index"));
        }
        if rebuilt.dense != self.dense {
            return Err(CorpusError::Inconsistent("dense index"));
        }
        self.positions = rebuilt.positions;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn get(&self, doc_id: &str) -> Option<&Document> {
        self.positions.get(doc_id).map(|&i| &self.documents[i])
    }

    pub fn contains(&self, doc_id: &str) -> bool {
        self.positions.contains_key(doc_id)
    }

    pub fn embedding_dim(&self) -> Option<usize> {
        self.dense.as_ref().map(|d| d.dim)
    }

    pub fn has_dense_index(&self) -> bool {
        self.dense.is_some()
    }

    /// Top-`k` documents for `query`. Scores tie-break on ascending doc_id,
    /// and exactly `min(k, len)` hits are returned.
    pub fn retrieve_topk(
        &self,
        query: &str,
        k: usize,
        mode: RetrievalMode,
        embedder: Option<&dyn EmbeddingProvider>,
    ) -> Result<RankedDocuments, RetrievalError> {
        if k == 0 {
            return Err(RetrievalError::ZeroK);
        }
        let terms = tokenize(query);
        if terms.is_empty() {
            return Err(RetrievalError::EmptyQuery);
        }
        let scores = match mode {
            RetrievalMode::Lexical => {
                let mut seen = BTreeSet::new();
                let unique: Vec<String> = terms.into_iter().filter(|t| seen.insert(t.clone())).collect();
                self.lexical.score_all(&unique)
            }
            RetrievalMode::Dense => self.dense_scores(query, embedder)?,
        };
        let mut ranked: Vec<(usize, f64)> = scores.into_iter().enumerate().collect();
        ranked.sort_by(|a, b| {
            b.1.partial_cmp(&a.1)
                .unwrap_or(Ordering::Equal)
                .then_with(|| self.documents[a.0].doc_id.cmp(&self.documents[b.0].doc_id))
        });
        ranked.truncate(k);
        Ok(RankedDocuments {
            query: query.to_owned(),
            hits: ranked
                .into_iter()
                .map(|(i, score)| Hit {
                    doc_id: self.documents[i].doc_id.clone(),
                    score,
                })
                .collect(),
            k_requested: k,
        })
    }

    fn dense_scores(&self, query: &str, embedder: Option<&dyn EmbeddingProvider>) -> Result<Vec<f64>, RetrievalError> {
        let dense = self.dense.as_ref().ok_or(RetrievalError::NoDenseIndex)?;
        let embedder = embedder.ok_or(RetrievalError::NoEmbedder)?;
        let mut q = embedder.embed(query).map_err(RetrievalError::Embedding)?;
        if q.len() != dense.dim {
            return Err(RetrievalError::QueryDimension {
                expected: dense.dim,
                found: q.len(),
            });
        }
        let norm = l2_norm(&q);
        if norm > 0.0 {
            q.iter_mut().for_each(|x| *x /= norm);
        }
        Ok(self
            .documents
            .iter()
            .map(|d| {
                let v = d.embedding.as_ref().expect("dense index implies embeddings");
                v.iter().zip(&q).map(|(a, b)| a * b).sum()
            })
            .collect())
    }
}

fn l2_norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}
