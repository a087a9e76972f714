//! Command-line driver: synthetic data generation, embedding training,
//! seed-list construction and expansion, model evaluation and the entropy
//! tables, each as a subcommand.
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on usage or
//! configuration errors. Failures print one JSON object on stderr:
//! `{"error":"usage","message":"..."}`.

pub mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::PipelineConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Runtime(_) => "runtime",
        }
    }

    /// Single-line JSON rendering.
    pub fn to_line(&self) -> String {
        let message = self.to_string().split_whitespace().collect::<Vec<_>>().join(" ");
        serde_json::json!({ "error": self.kind(), "message": message }).to_string()
    }
}

#[derive(Debug, Parser)]
#[command(name = "trailaug", version, about = "Trail augmentation pipeline for B2B conversion prediction")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// TOML pipeline config; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// RNG seed for this stage.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus and its ground truth.
    Gen(GenArgs),
    /// Train activity embeddings.
    Embed(EmbedArgs),
    /// Measure LSH recall against exact search.
    IndexCheck(IndexCheckArgs),
    /// Build the initial seed list from conversion rates.
    SeedlistInit(SeedlistInitArgs),
    /// Expand a seed list with embedding neighbors while validation AUC improves.
    Expand(ExpandArgs),
    /// Fit the conversion model and score the validation partition.
    Train(ModelArgs),
    /// Fit the conversion model and score the test partition.
    Eval(ModelArgs),
    /// Closed-form conditional entropies over a range of organization sizes.
    Entropy(EntropyArgs),
    /// Plug-in conditional entropy of a corpus.
    EntropyEmpirical(EntropyEmpiricalArgs),
    /// Run every stage end to end and write the report directory.
    Repro(ReproArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub r: Option<u32>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long = "p_o")]
    pub p_o: Option<f64>,
    #[arg(long = "type2_fraction")]
    pub type2_fraction: Option<f64>,
    #[arg(long = "n_relevant")]
    pub n_relevant: Option<u32>,
    #[arg(long = "n_noise")]
    pub n_noise: Option<u32>,
    #[arg(long = "trail_len")]
    pub trail_len: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    #[arg(long)]
    pub negatives: Option<usize>,
    #[arg(long = "min_count")]
    pub min_count: Option<u32>,
    /// Single worker, reproducible output.
    #[arg(long, conflicts_with = "parallel")]
    pub deterministic: bool,
    /// Lock-free multi-threaded training; output varies between runs.
    #[arg(long)]
    pub parallel: bool,
}

#[derive(Debug, Args)]
pub struct IndexCheckArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 200)]
    pub queries: usize,
    #[arg(long = "n_tables")]
    pub n_tables: Option<usize>,
    #[arg(long = "n_planes")]
    pub n_planes: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SeedlistInitArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Seed-list file of activities to add.
    #[arg(long)]
    pub include: Option<PathBuf>,
    /// Seed-list file of activities to drop.
    #[arg(long)]
    pub exclude: Option<PathBuf>,
    /// Ground truth; prints the list's precision.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long = "k_initial")]
    pub k_initial: Option<usize>,
    #[arg(long = "min_support")]
    pub min_support: Option<u32>,
    #[arg(long = "window_days")]
    pub window_days: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ExpandArgs {
    /// `--out` is a directory receiving `seeds.txt` and `trace.csv`.
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Initial seed-list file.
    #[arg(long)]
    pub seeds: Option<PathBuf>,
    #[arg(long = "delta_sim")]
    pub delta_sim: Option<f64>,
    #[arg(long = "delta_nbr")]
    pub delta_nbr: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long = "max_iterations")]
    pub max_iterations: Option<u32>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Seed-list file; omitted means the empty list.
    #[arg(long)]
    pub seeds: Option<PathBuf>,
    /// Write the fitted model as JSON.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long = "learning_rate")]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub l2: Option<f64>,
    #[arg(long)]
    pub epochs: Option<u32>,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long = "p_o", default_value_t = 0.1)]
    pub p_o: f64,
    #[arg(long, default_value_t = 1)]
    pub r: u32,
    /// Organization sizes, `lo:hi` inclusive or a single value.
    #[arg(long, default_value = "3:50", value_parser = parse_range)]
    pub s: (u32, u32),
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EntropyEmpiricalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, conflicts_with = "fig2")]
    pub corpus: Option<PathBuf>,
    /// Seed-list file defining R.
    #[arg(long, conflicts_with = "fig2")]
    pub seeds: Option<PathBuf>,
    /// Use the planted relevant set of this ground truth as the seed list.
    #[arg(long, conflicts_with_all = ["fig2", "seeds"])]
    pub truth: Option<PathBuf>,
    /// Built-in two-organization toy corpus.
    #[arg(long)]
    pub fig2: bool,
    /// R from augmented trails instead of own trails.
    #[arg(long)]
    pub augmented: bool,
}

#[derive(Debug, Args)]
pub struct ReproArgs {
    /// `--out` is the report directory.
    #[command(flatten)]
    pub common: Common,
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let bad = |e: std::num::ParseIntError| format!("`{s}`: {e}");
    let (lo, hi) = match s.split_once(':') {
        Some((a, b)) => (a.trim().parse().map_err(bad)?, b.trim().parse().map_err(bad)?),
        None => {
            let v = s.trim().parse().map_err(bad)?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(format!("`{s}`: empty range"));
    }
    Ok((lo, hi))
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Embed(a) => commands::embed(a),
        Command::IndexCheck(a) => commands::index_check(a),
        Command::SeedlistInit(a) => commands::seedlist_init(a),
        Command::Expand(a) => commands::expand(a),
        Command::Train(a) => commands::model(a, trailaug::convmodel::Partition::Validation),
        Command::Eval(a) => commands::model(a, trailaug::convmodel::Partition::Test),
        Command::Entropy(a) => commands::entropy(a),
        Command::EntropyEmpirical(a) => commands::entropy_empirical(a),
        Command::Repro(a) => commands::repro(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let first = e.to_string().lines().next().unwrap_or_default().trim_start_matches("error: ").to_string();
            eprintln!("{}", CliError::Usage(first).to_line());
            return 2;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_line());
            e.exit_code()
        }
    }
}
