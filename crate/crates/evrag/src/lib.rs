//! File formats, model backends, benchmark harness and command-line front end
//! for the `evrag-core` reasoning engine.

pub mod batch;
pub mod cli;
pub mod config;
pub mod error;
pub mod harness;
pub mod http;
pub mod io;
pub mod recording;

pub use batch::{parallel_map, run_question_batch};
pub use config::{BackendConfig, CorpusSource, EmbedderConfig, RunConfigFile, Session};
pub use error::{Error, Result};
pub use harness::{noise_sweep, run_benchmark, BenchmarkRun, SweepPoint};
pub use http::{ChatClient, ChatMessage, HttpEmbedder, HttpSettings, LlmTransport, OpenAiChat, PromptSet};
pub use io::{ingest_corpus, load_index, read_dataset, save_index};
pub use recording::RecordingTransport;
