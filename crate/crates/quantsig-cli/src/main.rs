//! `quantsig` — fetch daily OHLCV history, assemble indicator features,
//! train price and sentiment models, and write comparable run reports.
//!
//! Every run is driven by one flat config file plus a handful of override
//! flags, and lands in an output directory containing `metrics.csv`,
//! `metrics.txt`, `predictions.csv`, an SVG figure, trained model files,
//! and a `manifest.txt` whose config hash makes runs comparable. With a
//! warm cache, reruns are byte-identical.

mod config;
mod pipeline;
mod report;
mod svg;

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{ConfigError, RunConfig};

/// Process exit taxonomy: 1 usage, 2 data acquisition, 3 training or
/// evaluation. Success is 0.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Train(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Train(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Data(msg) | CliError::Train(msg) => f.write_str(msg),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<quantsig::marketdata::MarketDataError> for CliError {
    fn from(e: quantsig::marketdata::MarketDataError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<quantsig::indicators::IndicatorError> for CliError {
    fn from(e: quantsig::indicators::IndicatorError) -> Self {
        CliError::Train(e.to_string())
    }
}

impl From<quantsig::preprocess::PreprocessError> for CliError {
    fn from(e: quantsig::preprocess::PreprocessError) -> Self {
        CliError::Train(e.to_string())
    }
}

impl From<quantsig::models::ModelError> for CliError {
    fn from(e: quantsig::models::ModelError) -> Self {
        CliError::Train(e.to_string())
    }
}

impl From<quantsig::models::PersistError> for CliError {
    fn from(e: quantsig::models::PersistError) -> Self {
        CliError::Train(e.to_string())
    }
}

impl From<quantsig::textcorpus::TextError> for CliError {
    fn from(e: quantsig::textcorpus::TextError) -> Self {
        CliError::Train(e.to_string())
    }
}

impl From<quantsig::metrics::MetricsError> for CliError {
    fn from(e: quantsig::metrics::MetricsError) -> Self {
        CliError::Train(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "quantsig",
    version,
    about = "Daily market data, indicator features, from-scratch ML, and evaluation reports"
)]
struct Cli {
    /// Run configuration file (flat key=value lines; see README)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override the config's random seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the config's output directory
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Re-download even when a cached file exists
    #[arg(long, global = true)]
    refresh: bool,

    /// Prediction horizon in rows: 0 = same-day close target (leaks
    /// same-day information by construction), 1 = next-day
    #[arg(long, global = true)]
    horizon: Option<usize>,

    /// Corpus column holding the tweet text
    #[arg(long = "text-col", global = true, value_name = "NAME")]
    text_col: Option<String>,

    /// Corpus column holding the +1/−1 label
    #[arg(long = "label-col", global = true, value_name = "NAME")]
    label_col: Option<String>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Download daily history into the cache (or reuse it) and validate
    Fetch {
        /// Ticker symbol (default: config `symbol`)
        symbol: Option<String>,
        /// First day, YYYY-MM-DD (default: config `start`)
        start: Option<String>,
        /// Last day, YYYY-MM-DD (default: config `end`)
        end: Option<String>,
    },
    /// Assemble the indicator feature table and write features.csv
    Features,
    /// Train and evaluate a price regressor
    TrainPrice {
        /// Model name: linear or lstm
        model: String,
    },
    /// Train and evaluate sentiment classifiers
    TrainSentiment {
        /// Family name (lr, gnb, bnb, dt, rf, knn, svm, xgb, ann) or `all`
        family: String,
    },
    /// Merge finished run directories into comparison tables
    Report {
        /// Run directories containing manifest.txt
        dirs: Vec<PathBuf>,
    },
}

/// Config file → env override → flag overrides, in that order.
fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Ok(dir) = std::env::var("QUANTSIG_CACHE") {
        if !dir.is_empty() {
            cfg.cache_dir = PathBuf::from(dir);
        }
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(horizon) = cli.horizon {
        cfg.horizon = horizon;
    }
    if let Some(text_col) = &cli.text_col {
        cfg.text_col = text_col.clone();
    }
    if let Some(label_col) = &cli.label_col {
        cfg.label_col = label_col.clone();
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = resolve_config(&cli)?;
    match &cli.cmd {
        Cmd::Fetch { symbol, start, end } => {
            pipeline::cmd_fetch(&cfg, symbol.as_deref(), start.as_deref(), end.as_deref(), cli.refresh)
        }
        Cmd::Features => pipeline::cmd_features(&cfg, cli.refresh),
        Cmd::TrainPrice { model } => pipeline::cmd_train_price(&cfg, model, cli.refresh),
        Cmd::TrainSentiment { family } => pipeline::cmd_train_sentiment(&cfg, family),
        Cmd::Report { dirs } => report::cmd_report(dirs),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help / --version land here too; those exit 0
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.code());
    }
}
