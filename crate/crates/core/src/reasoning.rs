//! The iterative reasoning loop: decompose, retrieve, extract, merge, assess,
//! augment, until early stop or the iteration cap.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, EmbeddingProvider, RetrievalMode};
use crate::gateway::{AbstentionVerdict, DeficiencyReport, Gateway, GatewayError, Transport};
use crate::noise::inject_noise;
use crate::pool::{EvidencePool, RawUnit};
use crate::seed::derive_seed;
use crate::sru::RelevanceLabel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSetting {
    pub target_ratio: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoopConfig {
    pub max_iterations: u32,
    pub top_k: usize,
    pub n_max: usize,
    pub retrieval_mode: RetrievalMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSetting>,
    pub ablation_no_sru: bool,
    pub ablation_no_negative: bool,
    pub skip_seen_docs: bool,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            max_iterations: 5,
            top_k: 5,
            n_max: crate::gateway::DEFAULT_MAX_SUBQUERIES,
            retrieval_mode: RetrievalMode::Lexical,
            noise: None,
            ablation_no_sru: false,
            ablation_no_negative: false,
            skip_seen_docs: true,
        }
    }
}

impl LoopConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_iterations == 0 {
            return Err("max_iterations must be at least 1".into());
        }
        if self.top_k == 0 {
            return Err("top_k must be at least 1".into());
        }
        if self.n_max == 0 {
            return Err("n_max must be at least 1".into());
        }
        if let Some(n) = &self.noise {
            if !(0.0..1.0).contains(&n.target_ratio) {
                return Err(format!("noise target_ratio {} outside [0, 1)", n.target_ratio));
            }
        }
        Ok(())
    }

    /// Identifier of the active ablation, if any.
    pub fn ablation_id(&self) -> Option<&'static str> {
        match (self.ablation_no_sru, self.ablation_no_negative) {
            (false, false) => None,
            (true, false) => Some("no_sru"),
            (false, true) => Some("no_negative"),
            (true, true) => Some("no_sru+no_negative"),
        }
    }
}

/// Audit record of one iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub iteration: u32,
    pub query_used: String,
    pub sub_queries: Vec<String>,
    /// Doc ids per sub-query, after noise injection when enabled.
    pub retrieved: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub retrieval_errors: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub realized_noise_ratios: Vec<f64>,
    pub new_units: usize,
    pub pool_size: usize,
    pub supportive_ratio: Option<f64>,
    pub assessment: DeficiencyReport,
    pub augmented_query: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Answered { answer: String },
    Abstained { reason: String },
}

impl Outcome {
    pub fn answer(&self) -> Option<&str> {
        match self {
            Self::Answered { answer } => Some(answer),
            Self::Abstained { .. } => None,
        }
    }

    pub fn is_abstained(&self) -> bool {
        matches!(self, Self::Abstained { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub question: String,
    pub outcome: Outcome,
    pub iterations_used: u32,
    pub traces: Vec<IterationTrace>,
    pub final_pool: EvidencePool,
    /// Present when the cap was reached without sufficient evidence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abstention: Option<AbstentionVerdict>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoopErrorKind {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error("iteration {iteration}: no sub-query could be retrieved ({})", errors.join("; "))]
    NoRetrieval { iteration: u32, errors: Vec<String> },
}

/// A failed episode, with the traces of the iterations that completed.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind}")]
pub struct LoopError {
    pub kind: LoopErrorKind,
    pub partial: Vec<IterationTrace>,
}

/// Runs one question with lexical or dense retrieval as configured.
pub struct Reasoner<'a, T> {
    pub corpus: &'a Corpus,
    pub gateway: &'a Gateway<T>,
    pub embedder: Option<&'a dyn EmbeddingProvider>,
}

impl<T> Clone for Reasoner<'_, T> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<T> Copy for Reasoner<'_, T> {}

/// Runs one episode without a query embedder (lexical retrieval).
pub fn run_question<T: Transport>(
    question: &str,
    corpus: &Corpus,
    gateway: &Gateway<T>,
    config: &LoopConfig,
) -> Result<RunResult, LoopError> {
    Reasoner {
        corpus,
        gateway,
        embedder: None,
    }
    .run_question(question, config)
}

impl<T: Transport> Reasoner<'_, T> {
    pub fn run_question(&self, question: &str, config: &LoopConfig) -> Result<RunResult, LoopError> {
        let fail = |kind: LoopErrorKind, partial: &Vec<IterationTrace>| LoopError {
            kind,
            partial: partial.clone(),
        };
        let no_traces = Vec::new();
        config
            .validate()
            .map_err(|e| fail(LoopErrorKind::Config(e), &no_traces))?;
        if question.trim().is_empty() {
            return Err(fail(LoopErrorKind::Config("question is empty".into()), &no_traces));
        }
        if config.retrieval_mode == RetrievalMode::Dense {
            if !self.corpus.has_dense_index() {
                return Err(fail(
                    LoopErrorKind::Config("dense retrieval needs a corpus with embeddings".into()),
                    &no_traces,
                ));
            }
            if self.embedder.is_none() {
                return Err(fail(
                    LoopErrorKind::Config("dense retrieval needs a query embedder".into()),
                    &no_traces,
                ));
            }
        }

        let gw = self.gateway;
        let mut pool = EvidencePool::new(question);
        let mut traces: Vec<IterationTrace> = Vec::new();
        let mut query = question.to_string();

        for t in 0..config.max_iterations {
            let sub_queries = gw
                .decompose_question(&query, config.n_max)
                .map_err(|e| fail(e.into(), &traces))?;

            let mut retrieved = Vec::with_capacity(sub_queries.len());
            let mut retrieval_errors = Vec::new();
            let mut realized_noise_ratios = Vec::new();
            let mut batches: Vec<(&str, Vec<String>)> = Vec::new();
            for (i, sq) in sub_queries.iter().enumerate() {
                let ranked = match self
                    .corpus
                    .retrieve_topk(sq, config.top_k, config.retrieval_mode, self.embedder)
                {
                    Ok(r) => r,
                    Err(e) => {
                        retrieval_errors.push(format!("{sq}: {e}"));
                        retrieved.push(Vec::new());
                        continue;
                    }
                };
                let ids: Vec<String> = match &config.noise {
                    None => ranked.doc_ids().map(String::from).collect(),
                    Some(n) => {
                        let seed = derive_seed(n.seed, &[u64::from(t), i as u64]);
                        match inject_noise(&ranked, self.corpus, n.target_ratio, seed) {
                            Ok(noisy) => {
                                realized_noise_ratios.push(noisy.realized_ratio);
                                noisy.doc_ids
                            }
                            Err(e) => {
                                retrieval_errors.push(format!("{sq}: {e}"));
                                retrieved.push(Vec::new());
                                continue;
                            }
                        }
                    }
                };
                retrieved.push(ids.clone());
                batches.push((sq.as_str(), ids));
            }
            if batches.is_empty() {
                return Err(fail(
                    LoopErrorKind::NoRetrieval {
                        iteration: t,
                        errors: retrieval_errors,
                    },
                    &traces,
                ));
            }

            let size_before = pool.len();
            let mut seen_this_round: BTreeSet<&str> = BTreeSet::new();
            let mut fresh = Vec::new();
            let mut fresh_raw = Vec::new();
            for (sq, ids) in &batches {
                for id in ids {
                    if config.skip_seen_docs && (pool.contains_doc(id) || !seen_this_round.insert(id.as_str())) {
                        continue;
                    }
                    let doc = self.corpus.get(id).expect("retrieval returns corpus ids");
                    if config.ablation_no_sru {
                        fresh_raw.push(RawUnit {
                            source_doc_id: doc.doc_id.clone(),
                            subquery: (*sq).to_string(),
                            text: doc.indexed_text().trim().to_string(),
                            iteration_born: t,
                        });
                        continue;
                    }
                    let unit = gw.extract_sru(sq, doc, t).map_err(|e| fail(e.into(), &traces))?;
                    if config.ablation_no_negative && unit.relevance() == RelevanceLabel::Irrelevant {
                        continue;
                    }
                    fresh.push(unit);
                }
            }
            pool.merge(fresh);
            pool.merge_raw(fresh_raw);

            let assessment = gw
                .assess_evidence(question, &pool)
                .map_err(|e| fail(e.into(), &traces))?;
            let mut trace = IterationTrace {
                iteration: t,
                query_used: query.clone(),
                sub_queries: sub_queries.clone(),
                retrieved,
                retrieval_errors,
                realized_noise_ratios,
                new_units: pool.len() - size_before,
                pool_size: pool.len(),
                supportive_ratio: pool.supportive_ratio().ok(),
                assessment: assessment.clone(),
                augmented_query: None,
            };

            if assessment.sufficient {
                traces.push(trace);
                let answer = gw
                    .synthesize_answer(question, &pool)
                    .map_err(|e| fail(e.into(), &traces))?;
                return Ok(RunResult {
                    question: question.to_string(),
                    outcome: Outcome::Answered { answer },
                    iterations_used: t + 1,
                    traces,
                    final_pool: pool,
                    abstention: None,
                });
            }

            if t + 1 < config.max_iterations {
                let next = gw
                    .augment_query(question, &pool, &assessment)
                    .map_err(|e| fail(e.into(), &traces))?;
                trace.augmented_query = Some(next.clone());
                traces.push(trace);
                query = next;
                continue;
            }
            traces.push(trace);
        }

        let verdict = gw
            .judge_abstention(question, &pool)
            .map_err(|e| fail(e.into(), &traces))?;
        let outcome = if verdict.answerable && !pool.is_empty() {
            let answer = gw
                .synthesize_answer(question, &pool)
                .map_err(|e| fail(e.into(), &traces))?;
            Outcome::Answered { answer }
        } else if verdict.answerable {
            Outcome::Abstained {
                reason: "no evidence was acquired".into(),
            }
        } else {
            Outcome::Abstained {
                reason: verdict.reason.clone(),
            }
        };
        Ok(RunResult {
            question: question.to_string(),
            outcome,
            iterations_used: config.max_iterations,
            traces,
            final_pool: pool,
            abstention: Some(verdict),
        })
    }
}
