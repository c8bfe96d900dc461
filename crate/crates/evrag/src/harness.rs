//! Benchmark runs, noise sweeps and their flat tables.

use std::num::NonZeroUsize;
use std::path::Path;

use evrag_core::eval::{build_report, InstanceStatus, MetricReport};
use evrag_core::reasoning::Reasoner;
use evrag_core::seed::{derive_seed, label_hash};
use evrag_core::{LoopConfig, NoiseSetting, QaInstance, RunResult, TaskForm, Transport};
use serde::{Deserialize, Serialize};

use crate::batch::parallel_map;
use crate::error::{Error, Result};
use crate::io::create_parent;

/// A scored benchmark together with the raw per-instance outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRun {
    pub report: MetricReport,
    pub runs: Vec<Result<RunResult, String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub target_ratio: f64,
    pub realized_ratio_mean: f64,
    pub report: MetricReport,
}

/// Noise seed for one instance: depends only on the run seed, the target
/// ratio and the qid, never on scheduling.
pub fn instance_noise_seed(seed: u64, target_ratio: f64, qid: &str) -> u64 {
    derive_seed(seed, &[target_ratio.to_bits(), label_hash(qid)])
}

/// Runs every instance and scores it. Loop errors become failed instances.
pub fn run_benchmark<T: Transport>(
    dataset: &[QaInstance],
    reasoner: Reasoner<'_, T>,
    config: &LoopConfig,
    seed: u64,
    parallelism: NonZeroUsize,
) -> Result<BenchmarkRun> {
    if dataset.is_empty() {
        return Err(evrag_core::eval::EvalError::Empty.into());
    }
    config.validate().map_err(Error::Config)?;
    let runs = parallel_map(dataset.len(), parallelism, |i| {
        let inst = &dataset[i];
        let mut cfg = config.clone();
        if let Some(n) = cfg.noise.as_mut() {
            n.seed = instance_noise_seed(seed, n.target_ratio, &inst.qid);
        }
        reasoner.run_question(&inst.question, &cfg).map_err(|e| e.to_string())
    });
    let report = build_report(dataset, &runs, config, seed)?;
    Ok(BenchmarkRun { report, runs })
}

/// One benchmark per ratio with only the noise setting varying. A ratio of
/// zero disables injection, so that point equals a plain benchmark.
pub fn noise_sweep<T: Transport>(
    dataset: &[QaInstance],
    reasoner: Reasoner<'_, T>,
    base_config: &LoopConfig,
    ratios: &[f64],
    seed: u64,
    parallelism: NonZeroUsize,
) -> Result<Vec<SweepPoint>> {
    if let Some(bad) = ratios.iter().find(|r| !(0.0..1.0).contains(*r)) {
        return Err(Error::Config(format!("noise ratio {bad} outside [0, 1)")));
    }
    ratios
        .iter()
        .map(|&r| {
            let mut cfg = base_config.clone();
            cfg.noise = (r > 0.0).then_some(NoiseSetting { target_ratio: r, seed });
            let run = run_benchmark(dataset, reasoner, &cfg, seed, parallelism)?;
            Ok(SweepPoint {
                target_ratio: r,
                realized_ratio_mean: run.report.noise.as_ref().map_or(0.0, |n| n.realized_ratio_mean),
                report: run.report,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct InstanceRow<'a> {
    target_ratio: Option<f64>,
    qid: &'a str,
    task_kind: TaskForm,
    status: InstanceStatus,
    em: Option<f64>,
    f1: f64,
    acc: f64,
    iterations_used: Option<u32>,
    prediction: Option<&'a str>,
    error: Option<&'a str>,
}

#[derive(Serialize)]
struct SweepRow {
    target_ratio: f64,
    realized_ratio_mean: f64,
    em: Option<f64>,
    f1: f64,
    acc: f64,
    abstention_rate: f64,
    failure_rate: f64,
}

#[derive(Serialize)]
struct CurveRow {
    target_ratio: Option<f64>,
    iteration: usize,
    supportive_ratio: f64,
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    create_parent(path)?;
    csv::Writer::from_path(path).map_err(Error::from)
}

/// One row per instance. `target_ratio` is empty outside sweeps.
pub fn write_instance_table(path: &Path, reports: &[(Option<f64>, &MetricReport)]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for (ratio, report) in reports {
        for i in &report.instances {
            w.serialize(InstanceRow {
                target_ratio: *ratio,
                qid: &i.qid,
                task_kind: i.task_kind,
                status: i.status,
                em: i.em,
                f1: i.f1,
                acc: i.acc,
                iterations_used: i.iterations_used,
                prediction: i.prediction.as_deref(),
                error: i.error.as_deref(),
            })?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One row per sweep point.
pub fn write_sweep_table(path: &Path, points: &[SweepPoint]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for p in points {
        w.serialize(SweepRow {
            target_ratio: p.target_ratio,
            realized_ratio_mean: p.realized_ratio_mean,
            em: p.report.means.em,
            f1: p.report.means.f1,
            acc: p.report.means.acc,
            abstention_rate: p.report.abstention_rate,
            failure_rate: p.report.failure_rate,
        })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Supportive-ratio curve, one row per iteration (1-based).
pub fn write_curve_table(path: &Path, reports: &[(Option<f64>, &MetricReport)]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for (ratio, report) in reports {
        for (t, v) in report.supportive_curve.iter().enumerate() {
            w.serialize(CurveRow {
                target_ratio: *ratio,
                iteration: t + 1,
                supportive_ratio: *v,
            })?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}
