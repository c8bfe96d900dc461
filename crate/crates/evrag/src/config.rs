//! Run configuration file and the session it describes.

use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::time::Duration;

use evrag_core::reasoning::Reasoner;
use evrag_core::{Corpus, EmbeddingProvider, Gateway, HashingEmbedder, LoopConfig, Transport};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::http::{HttpEmbedder, HttpSettings, LlmTransport, OpenAiChat, PromptSet};
use crate::io::{ingest_corpus, load_index, load_scripted_backend};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Questions run concurrently during `eval`.
    #[serde(default = "default_parallelism")]
    pub parallelism: NonZeroUsize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    pub corpus: CorpusSource,
    #[serde(default, rename = "loop")]
    pub loop_config: LoopConfig,
    pub backend: BackendConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embedder: Option<EmbedderConfig>,
}

/// Either a persisted index or document (and embedding) files.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub documents: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub embeddings: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendConfig {
    Scripted {
        table: PathBuf,
        #[serde(default = "default_schema_retries")]
        max_schema_retries: u32,
    },
    Http {
        endpoint: String,
        model: String,
        /// Name of the environment variable holding the API key.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        api_key_env: Option<String>,
        #[serde(default)]
        temperature: f64,
        #[serde(default = "default_in_flight")]
        max_in_flight: usize,
        #[serde(default = "default_timeout")]
        timeout_secs: u64,
        #[serde(default = "default_transport_retries")]
        transport_retries: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        prompts_dir: Option<PathBuf>,
        #[serde(default = "default_schema_retries")]
        max_schema_retries: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EmbedderConfig {
    Hashing {
        dim: usize,
    },
    Http {
        endpoint: String,
        model: String,
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        api_key_env: Option<String>,
        #[serde(default = "default_timeout")]
        timeout_secs: u64,
    },
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_parallelism() -> NonZeroUsize {
    NonZeroUsize::MIN
}

fn default_schema_retries() -> u32 {
    evrag_core::gateway::DEFAULT_SCHEMA_RETRIES
}

fn default_in_flight() -> usize {
    4
}

fn default_timeout() -> u64 {
    60
}

fn default_transport_retries() -> u32 {
    2
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl RunConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.loop_config.validate().map_err(Error::Config)?;
        if cfg.corpus.index.is_none() && cfg.corpus.documents.is_none() {
            return Err(Error::Config("[corpus] needs `index` or `documents`".into()));
        }
        if cfg.corpus.index.is_some() && (cfg.corpus.documents.is_some() || cfg.corpus.embeddings.is_some()) {
            return Err(Error::Config(
                "[corpus] takes either `index` or `documents`, not both".into(),
            ));
        }
        Ok(cfg)
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        resolve(base, &mut cfg.output_dir);
        for p in [
            &mut cfg.dataset,
            &mut cfg.corpus.index,
            &mut cfg.corpus.documents,
            &mut cfg.corpus.embeddings,
        ]
        .into_iter()
        .flatten()
        {
            resolve(base, p);
        }
        match &mut cfg.backend {
            BackendConfig::Scripted { table, .. } => resolve(base, table),
            BackendConfig::Http { prompts_dir, .. } => {
                if let Some(p) = prompts_dir {
                    resolve(base, p);
                }
            }
        }
        Ok(cfg)
    }
}

fn api_key(var: &Option<String>) -> Result<Option<String>> {
    match var {
        None => Ok(None),
        Some(name) => std::env::var(name)
            .map(Some)
            .map_err(|_| Error::Config(format!("environment variable {name} is not set"))),
    }
}

/// Corpus, gateway and optional query embedder built from a config.
pub struct Session {
    pub config: RunConfigFile,
    pub corpus: Corpus,
    pub gateway: Gateway<Box<dyn Transport>>,
    pub embedder: Option<Box<dyn EmbeddingProvider>>,
}

impl Session {
    pub fn open(config: RunConfigFile) -> Result<Self> {
        let corpus = match (&config.corpus.index, &config.corpus.documents) {
            (Some(index), _) => load_index(index)?,
            (None, Some(docs)) => ingest_corpus(docs, config.corpus.embeddings.as_deref())?,
            (None, None) => return Err(Error::Config("[corpus] needs `index` or `documents`".into())),
        };
        let (transport, retries): (Box<dyn Transport>, u32) = match &config.backend {
            BackendConfig::Scripted {
                table,
                max_schema_retries,
            } => (Box::new(load_scripted_backend(table)?), *max_schema_retries),
            BackendConfig::Http {
                endpoint,
                model,
                api_key_env,
                temperature,
                max_in_flight,
                timeout_secs,
                transport_retries,
                prompts_dir,
                max_schema_retries,
            } => {
                let settings = HttpSettings {
                    endpoint: endpoint.clone(),
                    model: model.clone(),
                    api_key: api_key(api_key_env)?,
                    temperature: *temperature,
                    timeout: Duration::from_secs(*timeout_secs),
                };
                let mut prompts = PromptSet::builtin();
                if let Some(dir) = prompts_dir {
                    prompts = prompts.with_overrides(dir)?;
                }
                let t = LlmTransport::new(OpenAiChat::new(settings), prompts, *max_in_flight)
                    .with_transport_retries(*transport_retries, Duration::from_millis(500));
                (Box::new(t), *max_schema_retries)
            }
        };
        let embedder: Option<Box<dyn EmbeddingProvider>> = match &config.embedder {
            None => None,
            Some(EmbedderConfig::Hashing { dim }) => {
                if *dim == 0 {
                    return Err(Error::Config("embedder dim must be positive".into()));
                }
                Some(Box::new(HashingEmbedder::new(*dim)))
            }
            Some(EmbedderConfig::Http {
                endpoint,
                model,
                dim,
                api_key_env,
                timeout_secs,
            }) => Some(Box::new(HttpEmbedder::new(
                HttpSettings {
                    endpoint: endpoint.clone(),
                    model: model.clone(),
                    api_key: api_key(api_key_env)?,
                    temperature: 0.0,
                    timeout: Duration::from_secs(*timeout_secs),
                },
                *dim,
            ))),
        };
        Ok(Self {
            config,
            corpus,
            gateway: Gateway::new(transport).with_schema_retries(retries),
            embedder,
        })
    }

    pub fn reasoner(&self) -> Reasoner<'_, Box<dyn Transport>> {
        Reasoner {
            corpus: &self.corpus,
            gateway: &self.gateway,
            embedder: self.embedder.as_deref(),
        }
    }
}
