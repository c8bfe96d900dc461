//! Core of a stateful, evidence-driven retrieval-augmented QA engine.
//!
//! Questions are answered by decomposing them into sub-queries, retrieving
//! documents, distilling each document into a structured reasoning unit
//! ([`Sru`]), and accumulating those units in a persistent, contrastive
//! [`EvidencePool`]. The pool is assessed after every iteration; deficiencies
//! drive an augmented query for the next round until the evidence suffices or
//! the iteration cap forces an abstention decision.
//!
//! This crate is `no_std` (with `alloc`). File IO, HTTP backends and the CLI
//! live in the companion `evrag` crate.
#![no_std]

extern crate alloc;

pub mod corpus;
pub mod eval;
pub mod gateway;
pub mod noise;
pub mod pool;
pub mod reasoning;
pub mod seed;
pub mod sru;
pub mod text;

pub use corpus::{
    Corpus, CorpusError, Document, EmbeddingProvider, HashingEmbedder, Hit, RankedDocuments, RetrievalError,
    RetrievalMode,
};
pub use eval::{
    accumulation_curve, normalize_answer, score_acc, score_em, score_f1, MetricReport, QaInstance, TaskForm,
};
pub use gateway::{
    AbstentionVerdict, DeficiencyReport, Gateway, GatewayError, ScriptedBackend, TaskKind, TaskRequest, Transport,
    TransportError,
};
pub use noise::{inject_noise, NoiseError, NoisyRetrieval};
pub use pool::{EvidencePool, PoolError, RawUnit};
pub use reasoning::{run_question, IterationTrace, LoopConfig, LoopError, NoiseSetting, Outcome, RunResult};
pub use sru::{RelevanceLabel, Sru, SruError};
