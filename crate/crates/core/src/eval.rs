//! Answer normalization, EM / F1 / ACC scoring, report assembly and the
//! supportive-evidence accumulation curve.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reasoning::{LoopConfig, Outcome, RunResult};

/// Recorded in every report so scores stay comparable across runs.
pub const NORMALIZATION_VERSION: &str = "v1:lowercase,strip-punctuation,drop-articles(a|an|the),whitespace-split";
/// Recorded in every report: how early-stopped runs enter the curve.
pub const CURVE_RULE: &str = "survivor-mean";

const ARTICLES: [&str; 3] = ["a", "an", "the"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("gold answer set is empty")]
    NoGold,
    #[error("no results to aggregate")]
    Empty,
    #[error("duplicate qid {0:?}")]
    DuplicateQid(String),
    #[error("instance {0:?} has no gold answers")]
    MissingGold(String),
    #[error("dataset and outcome lists differ in length ({dataset} vs {outcomes})")]
    LengthMismatch { dataset: usize, outcomes: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskForm {
    ShortForm,
    LongForm,
    MultiHop,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QaInstance {
    pub qid: String,
    pub question: String,
    pub gold_answers: Vec<String>,
    pub task_kind: TaskForm,
}

/// Checks qid uniqueness and non-empty gold sets.
pub fn validate_dataset(dataset: &[QaInstance]) -> Result<(), EvalError> {
    let mut seen = BTreeSet::new();
    for inst in dataset {
        if !seen.insert(inst.qid.as_str()) {
            return Err(EvalError::DuplicateQid(inst.qid.clone()));
        }
        if inst.gold_answers.is_empty() {
            return Err(EvalError::MissingGold(inst.qid.clone()));
        }
    }
    Ok(())
}

/// Lowercase, remove punctuation, drop the articles a/an/the, split on whitespace.
pub fn normalize_answer(text: &str) -> Vec<String> {
    let cleaned: String = text
        .chars()
        .flat_map(char::to_lowercase)
        .filter(|c| c.is_alphanumeric() || c.is_whitespace())
        .collect();
    cleaned
        .split_whitespace()
        .filter(|t| !ARTICLES.contains(t))
        .map(ToString::to_string)
        .collect()
}

fn best_over_gold(
    prediction: &str,
    gold_answers: &[String],
    score: impl Fn(&[String], &[String]) -> f64,
) -> Result<f64, EvalError> {
    if gold_answers.is_empty() {
        return Err(EvalError::NoGold);
    }
    let pred = normalize_answer(prediction);
    Ok(gold_answers
        .iter()
        .map(|g| score(&pred, &normalize_answer(g)))
        .fold(0.0, f64::max))
}

/// 1.0 iff the normalized prediction equals some normalized gold answer.
pub fn score_em(prediction: &str, gold_answers: &[String]) -> Result<f64, EvalError> {
    best_over_gold(prediction, gold_answers, |p, g| if p == g { 1.0 } else { 0.0 })
}

/// Bag-of-tokens F1, maximized over gold answers.
pub fn score_f1(prediction: &str, gold_answers: &[String]) -> Result<f64, EvalError> {
    best_over_gold(prediction, gold_answers, token_f1)
}

/// 1.0 iff some normalized gold answer occurs as a contiguous token run in
/// the normalized prediction. An empty gold matches only an empty prediction.
pub fn score_acc(prediction: &str, gold_answers: &[String]) -> Result<f64, EvalError> {
    best_over_gold(prediction, gold_answers, |p, g| {
        let hit = if g.is_empty() {
            p.is_empty()
        } else {
            p.windows(g.len()).any(|w| w == g)
        };
        if hit {
            1.0
        } else {
            0.0
        }
    })
}

fn token_f1(pred: &[String], gold: &[String]) -> f64 {
    match (pred.is_empty(), gold.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for t in gold {
        *counts.entry(t.as_str()).or_default() += 1;
    }
    let mut overlap = 0usize;
    for t in pred {
        if let Some(c) = counts.get_mut(t.as_str()) {
            if *c > 0 {
                *c -= 1;
                overlap += 1;
            }
        }
    }
    if overlap == 0 {
        return 0.0;
    }
    let precision = overlap as f64 / pred.len() as f64;
    let recall = overlap as f64 / gold.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Mean supportive ratio per iteration. At iteration `t` the mean runs over
/// every result whose trace reaches `t` and whose pool had structured units;
/// the curve ends at the first iteration with no such result.
pub fn accumulation_curve<'a, I>(results: I) -> Result<Vec<f64>, EvalError>
where
    I: IntoIterator<Item = &'a RunResult>,
{
    let results: Vec<&RunResult> = results.into_iter().collect();
    if results.is_empty() {
        return Err(EvalError::Empty);
    }
    let depth = results.iter().map(|r| r.traces.len()).max().unwrap_or(0);
    let mut curve = Vec::with_capacity(depth);
    for t in 0..depth {
        let values: Vec<f64> = results
            .iter()
            .filter_map(|r| r.traces.get(t).and_then(|tr| tr.supportive_ratio))
            .collect();
        if values.is_empty() {
            break;
        }
        curve.push(values.iter().sum::<f64>() / values.len() as f64);
    }
    Ok(curve)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceStatus {
    Answered,
    Abstained,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceScore {
    pub qid: String,
    pub task_kind: TaskForm,
    pub status: InstanceStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prediction: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub em: Option<f64>,
    pub f1: f64,
    pub acc: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations_used: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricMeans {
    /// Absent when every instance is long-form.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub em: Option<f64>,
    pub f1: f64,
    pub acc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSummary {
    pub target_ratio: f64,
    pub realized_ratio_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub normalization: String,
    pub curve_rule: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ablation: Option<String>,
    pub seed: u64,
    pub config: LoopConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSummary>,
    pub instances: Vec<InstanceScore>,
    pub means: MetricMeans,
    pub abstention_rate: f64,
    pub failure_rate: f64,
    pub supportive_curve: Vec<f64>,
}

/// Scores one instance. Abstentions and failures score 0 on every metric;
/// long-form instances carry no EM.
pub fn score_instance(inst: &QaInstance, outcome: &Result<RunResult, String>) -> Result<InstanceScore, EvalError> {
    let em_applies = inst.task_kind != TaskForm::LongForm;
    let zero = |status, iterations_used, error| InstanceScore {
        qid: inst.qid.clone(),
        task_kind: inst.task_kind,
        status,
        prediction: None,
        em: em_applies.then_some(0.0),
        f1: 0.0,
        acc: 0.0,
        iterations_used,
        error,
    };
    match outcome {
        Err(e) => Ok(zero(InstanceStatus::Failed, None, Some(e.clone()))),
        Ok(run) => match &run.outcome {
            Outcome::Abstained { .. } => Ok(zero(InstanceStatus::Abstained, Some(run.iterations_used), None)),
            Outcome::Answered { answer } => Ok(InstanceScore {
                qid: inst.qid.clone(),
                task_kind: inst.task_kind,
                status: InstanceStatus::Answered,
                prediction: Some(answer.clone()),
                em: if em_applies {
                    Some(score_em(answer, &inst.gold_answers)?)
                } else {
                    None
                },
                f1: score_f1(answer, &inst.gold_answers)?,
                acc: score_acc(answer, &inst.gold_answers)?,
                iterations_used: Some(run.iterations_used),
                error: None,
            }),
        },
    }
}

/// Reduces per-instance outcomes (in dataset order) into a report.
pub fn build_report(
    dataset: &[QaInstance],
    outcomes: &[Result<RunResult, String>],
    config: &LoopConfig,
    seed: u64,
) -> Result<MetricReport, EvalError> {
    if dataset.is_empty() {
        return Err(EvalError::Empty);
    }
    if dataset.len() != outcomes.len() {
        return Err(EvalError::LengthMismatch {
            dataset: dataset.len(),
            outcomes: outcomes.len(),
        });
    }
    let instances = dataset
        .iter()
        .zip(outcomes)
        .map(|(inst, out)| score_instance(inst, out))
        .collect::<Result<Vec<_>, _>>()?;

    let n = instances.len() as f64;
    let mean = |f: fn(&InstanceScore) -> f64| instances.iter().map(f).sum::<f64>() / n;
    let ems: Vec<f64> = instances.iter().filter_map(|i| i.em).collect();
    let means = MetricMeans {
        em: (!ems.is_empty()).then(|| ems.iter().sum::<f64>() / ems.len() as f64),
        f1: mean(|i| i.f1),
        acc: mean(|i| i.acc),
    };
    let count = |s: InstanceStatus| instances.iter().filter(|i| i.status == s).count() as f64;
    let abstention_rate = count(InstanceStatus::Abstained) / n;
    let failure_rate = count(InstanceStatus::Failed) / n;

    let runs: Vec<&RunResult> = outcomes.iter().filter_map(|o| o.as_ref().ok()).collect();
    let supportive_curve = if runs.is_empty() {
        Vec::new()
    } else {
        accumulation_curve(runs.iter().copied())?
    };
    let noise = config.noise.map(|n| {
        let realized: Vec<f64> = runs
            .iter()
            .flat_map(|r| r.traces.iter())
            .flat_map(|t| t.realized_noise_ratios.iter().copied())
            .collect();
        NoiseSummary {
            target_ratio: n.target_ratio,
            realized_ratio_mean: if realized.is_empty() {
                0.0
            } else {
                realized.iter().sum::<f64>() / realized.len() as f64
            },
        }
    });

    Ok(MetricReport {
        normalization: NORMALIZATION_VERSION.into(),
        curve_rule: CURVE_RULE.into(),
        ablation: config.ablation_id().map(Into::into),
        seed,
        config: config.clone(),
        noise,
        instances,
        means,
        abstention_rate,
        failure_rate,
        supportive_curve,
    })
}
