//! `hedonic`: command-line front end for the corpus pipeline.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 model error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hedonic_core::{Error, PipelineConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(Error),
    #[error("{0}")]
    Model(Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Model(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "hedonic", version, about = "Corpus sifting, happiness scoring, and two-stage cohort classification")]
pub struct Cli {
    /// Flat `key = value` settings file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Extra `key=value` settings applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Default)]
pub struct FilterFlags {
    /// Keep posts containing links.
    #[arg(long)]
    pub keep_urls: bool,
    /// Keep retweets.
    #[arg(long)]
    pub keep_retweets: bool,
    /// Comma-separated accepted language codes; empty accepts any.
    #[arg(long, value_name = "CODES")]
    pub langs: Option<String>,
    /// Comma-separated terms that must all appear as tokens.
    #[arg(long, value_name = "TERMS")]
    pub query: Option<String>,
}

#[derive(Args, Debug, Default)]
pub struct LexiconFlags {
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub lexicon_format: Option<LexiconLayout>,
    #[arg(long)]
    pub lens_center: Option<f64>,
    #[arg(long)]
    pub lens_delta: Option<f64>,
    /// Score every lexicon word (no stop band).
    #[arg(long)]
    pub no_lens: bool,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum LexiconLayout {
    Pairs,
    Labmt,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Logistic,
    Cnn,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Drop links, retweets, horoscope posts and foreign-language posts.
    Sift {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, short)]
        output: PathBuf,
        #[command(flatten)]
        filter: FilterFlags,
    },
    /// Happiness time series as TSV.
    Happiness {
        #[arg(long, short)]
        input: PathBuf,
        #[command(flatten)]
        lexicon: LexiconFlags,
        #[arg(long, value_parser = ["day", "month"])]
        bin: Option<String>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Word shift between a reference and a comparison corpus.
    Shift {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        comparison: PathBuf,
        #[command(flatten)]
        lexicon: LexiconFlags,
        #[arg(long, default_value_t = 50)]
        top: usize,
        /// Also write an SVG bar chart here.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Train a relevance (logistic) or diagnostic (cnn) model.
    Train {
        #[arg(long, value_enum)]
        kind: ModelKind,
        /// Labeled examples: `{"text": ..., "label": ...}` per line.
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long)]
        model_out: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        epochs: Option<usize>,
        /// Logistic L2 penalty.
        #[arg(long)]
        l2: Option<f64>,
        /// Logistic training ratio `related:unrelated`, e.g. 1:10.
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        embed_dim: Option<usize>,
        /// Comma-separated CNN filter widths.
        #[arg(long)]
        widths: Option<String>,
        #[arg(long)]
        filters: Option<usize>,
        #[arg(long)]
        dropout_keep: Option<f64>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// Classify posts (or one `--text`) with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, short, conflicts_with = "text", required_unless_present = "text")]
        input: Option<PathBuf>,
        #[arg(long)]
        text: Option<String>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Sift, then keep relevant posts, then keep diagnostic posts.
    Cohort {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long)]
        logistic_model: Option<PathBuf>,
        #[arg(long)]
        cnn_model: Option<PathBuf>,
        /// Diagnostic posts, one record per line.
        #[arg(long, short)]
        output: PathBuf,
        /// Per-user diagnostic post counts as TSV.
        #[arg(long)]
        users: Option<PathBuf>,
        #[command(flatten)]
        filter: FilterFlags,
    },
    /// Most frequent hashtags with ambient happiness.
    Hashtags {
        #[arg(long, short)]
        input: PathBuf,
        #[command(flatten)]
        lexicon: LexiconFlags,
        #[arg(long)]
        top_k: Option<usize>,
        #[arg(long, default_value = "frequency", value_parser = ["frequency", "happiness"])]
        sort: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Replay posts over TCP under a per-second rate cap.
    Serve {
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 7878)]
        port: u16,
        #[arg(long)]
        cap: u64,
        /// Comma-separated terms that must all appear as tokens.
        #[arg(long)]
        query: Option<String>,
        /// Wait one real second per elapsed post second.
        #[arg(long)]
        pace: bool,
        /// Exit after this many client sessions.
        #[arg(long)]
        clients: Option<usize>,
    },
    /// Collect a replay into a post file and report the sampling estimate.
    Consume {
        #[arg(long)]
        address: String,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Sampling proportion from a collected count and withheld counts.
    SampleRate {
        #[arg(long)]
        collected: u64,
        /// Comma-separated withheld counts, one per limit notice.
        #[arg(long, default_value = "")]
        withheld: String,
    },
}

fn load_config(cli: &Cli) -> CliResult<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path).map_err(|e| CliError::Usage(e.to_string()))?,
        None => PipelineConfig::default(),
    };
    for kv in &cli.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, found {kv:?}")))?;
        cfg.set(k.trim(), v, 0).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = load_config(&cli).and_then(|cfg| commands::run(cli.command, cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hedonic: {e}");
            ExitCode::from(e.code())
        }
    }
}
