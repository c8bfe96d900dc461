//! `evrag ingest | ask | eval`.
//!
//! Exit codes: 0 success, 2 abstained, 3 invalid config or arguments,
//! 4 backend failure, 5 corpus or input data error, 1 anything else.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use evrag_core::eval::MetricReport;
use evrag_core::reasoning::LoopErrorKind;
use evrag_core::Outcome;

use crate::config::{RunConfigFile, Session};
use crate::error::{Error, Result};
use crate::harness::{noise_sweep, run_benchmark, write_curve_table, write_instance_table, write_sweep_table};
use crate::io::{ingest_corpus, read_dataset, save_index, write_json, write_jsonl};

pub const EXIT_OK: u8 = 0;
pub const EXIT_OTHER: u8 = 1;
pub const EXIT_ABSTAINED: u8 = 2;
pub const EXIT_CONFIG: u8 = 3;
pub const EXIT_BACKEND: u8 = 4;
pub const EXIT_INPUT: u8 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "evrag",
    version,
    about = "Evidence-pool question answering over a local corpus"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build and persist the retrieval indexes for a corpus.
    Ingest {
        /// Documents, one JSON record per line.
        #[arg(long)]
        corpus: PathBuf,
        /// Optional precomputed document embeddings, one JSON record per line.
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Where to write the index.
        #[arg(long)]
        out: PathBuf,
    },
    /// Answer one question and write its result and trace.
    Ask {
        question: String,
        #[arg(long)]
        config: PathBuf,
        /// Overrides the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a dataset, optionally as a noise sweep or an ablation.
    Eval {
        /// Dataset file; defaults to `dataset` in the config.
        dataset: Option<PathBuf>,
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated noise ratios in [0, 1).
        #[arg(long, value_delimiter = ',')]
        noise_ratios: Option<Vec<f64>>,
        #[arg(long, value_enum)]
        ablation: Option<Ablation>,
        /// Overrides the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Ablation {
    NoSru,
    NoNegative,
}

pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) => EXIT_CONFIG,
        Error::Loop(e) => match e.kind {
            LoopErrorKind::Config(_) => EXIT_CONFIG,
            LoopErrorKind::Gateway(_) => EXIT_BACKEND,
            LoopErrorKind::NoRetrieval { .. } => EXIT_INPUT,
        },
        Error::Io { .. } | Error::Parse { .. } | Error::Corpus { .. } | Error::Dataset { .. } | Error::Eval(_) => {
            EXIT_INPUT
        }
        Error::Csv(_) => EXIT_OTHER,
    }
}

/// Parses process arguments, runs the command and maps the outcome to an
/// exit code.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

pub fn run(command: Command) -> Result<u8> {
    match command {
        Command::Ingest {
            corpus,
            embeddings,
            out,
        } => cmd_ingest(&corpus, embeddings.as_deref(), &out),
        Command::Ask { question, config, out } => cmd_ask(&question, &config, out),
        Command::Eval {
            dataset,
            config,
            noise_ratios,
            ablation,
            out,
        } => cmd_eval(dataset, &config, noise_ratios, ablation, out),
    }
}

pub fn cmd_ingest(corpus_path: &Path, embeddings: Option<&Path>, out: &Path) -> Result<u8> {
    let corpus = ingest_corpus(corpus_path, embeddings)?;
    save_index(&corpus, out)?;
    match corpus.embedding_dim() {
        Some(dim) => println!("{} documents indexed (dense dimension {dim})", corpus.len()),
        None => println!("{} documents indexed", corpus.len()),
    }
    Ok(EXIT_OK)
}

fn load_config(path: &Path, out: Option<PathBuf>) -> Result<RunConfigFile> {
    let mut cfg = RunConfigFile::load(path)?;
    if let Some(dir) = out {
        cfg.output_dir = dir;
    }
    Ok(cfg)
}

pub fn cmd_ask(question: &str, config_path: &Path, out: Option<PathBuf>) -> Result<u8> {
    let session = Session::open(load_config(config_path, out)?)?;
    let result = session.reasoner().run_question(question, &session.config.loop_config)?;
    let dir = &session.config.output_dir;
    write_json(&dir.join("result.json"), &result)?;
    write_jsonl(&dir.join("trace.jsonl"), &result.traces)?;
    println!("iterations: {}", result.iterations_used);
    match &result.outcome {
        Outcome::Answered { answer } => {
            println!("answer: {answer}");
            Ok(EXIT_OK)
        }
        Outcome::Abstained { reason } => {
            println!("abstained: {reason}");
            Ok(EXIT_ABSTAINED)
        }
    }
}

fn means_line(report: &MetricReport) -> String {
    let em = report.means.em.map_or_else(|| "n/a".to_owned(), |v| format!("{v:.4}"));
    format!(
        "em={em} f1={:.4} acc={:.4} abstention_rate={:.4} failure_rate={:.4}",
        report.means.f1, report.means.acc, report.abstention_rate, report.failure_rate
    )
}

pub fn cmd_eval(
    dataset: Option<PathBuf>,
    config_path: &Path,
    noise_ratios: Option<Vec<f64>>,
    ablation: Option<Ablation>,
    out: Option<PathBuf>,
) -> Result<u8> {
    let mut cfg = load_config(config_path, out)?;
    match ablation {
        Some(Ablation::NoSru) => cfg.loop_config.ablation_no_sru = true,
        Some(Ablation::NoNegative) => cfg.loop_config.ablation_no_negative = true,
        None => {}
    }
    let dataset_path = dataset
        .or_else(|| cfg.dataset.clone())
        .ok_or_else(|| Error::Config("no dataset given on the command line or in the config".into()))?;
    let data = read_dataset(&dataset_path)?;
    let session = Session::open(cfg)?;
    let cfg = &session.config;
    let dir = &cfg.output_dir;

    match noise_ratios {
        None => {
            let run = run_benchmark(&data, session.reasoner(), &cfg.loop_config, cfg.seed, cfg.parallelism)?;
            write_json(&dir.join("report.json"), &run.report)?;
            write_instance_table(&dir.join("instances.csv"), &[(None, &run.report)])?;
            write_curve_table(&dir.join("curve.csv"), &[(None, &run.report)])?;
            println!("{} instances", data.len());
            println!("{}", means_line(&run.report));
        }
        Some(ratios) => {
            let points = noise_sweep(
                &data,
                session.reasoner(),
                &cfg.loop_config,
                &ratios,
                cfg.seed,
                cfg.parallelism,
            )?;
            write_json(&dir.join("sweep.json"), &points)?;
            write_sweep_table(&dir.join("sweep.csv"), &points)?;
            let reports: Vec<_> = points.iter().map(|p| (Some(p.target_ratio), &p.report)).collect();
            write_instance_table(&dir.join("instances.csv"), &reports)?;
            write_curve_table(&dir.join("curve.csv"), &reports)?;
            println!("{} instances, {} sweep points", data.len(), points.len());
            for p in &points {
                println!(
                    "noise={} realized={:.4} {}",
                    p.target_ratio,
                    p.realized_ratio_mean,
                    means_line(&p.report)
                );
            }
        }
    }
    Ok(EXIT_OK)
}
