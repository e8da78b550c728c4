use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rank_indep::{CorrelationKind, Family, Innovation, SettingLabel, TiePolicy};

use crate::ingest::{Delimiter, HeaderMode, IngestOptions};

#[derive(Debug, Parser)]
#[command(name = "rank-indep", version, about = "Rank-based tests of independence between two random vectors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one test on a pair of data files.
    Test(TestArgs),
    /// Run every requested kind and family on one dataset.
    Battery(BatteryArgs),
    /// Empirical rejection rates on synthetic data.
    Simulate(SimulateArgs),
    /// Power against the number of dependent columns (varying-sparsity design).
    Curve(CurveArgs),
    /// Rejection rates on random row subsamples of a dataset.
    Subsample(SubsampleArgs),
    /// Check fast pair statistics against brute-force enumeration.
    OracleCheck(OracleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
    Pretty,
}

fn parse_kind(s: &str) -> Result<CorrelationKind, String> {
    s.parse().map_err(|e: rank_indep::Error| e.to_string())
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: rank_indep::Error| e.to_string())
}

fn parse_label(s: &str) -> Result<SettingLabel, String> {
    s.parse().map_err(|e: rank_indep::Error| e.to_string())
}

fn parse_innovation(s: &str) -> Result<Innovation, String> {
    s.parse().map_err(|e: rank_indep::Error| e.to_string())
}

fn parse_ties(s: &str) -> Result<TiePolicy, String> {
    match s {
        "error" => Ok(TiePolicy::Error),
        "average-jitter-free" | "jitter-free" | "break" => Ok(TiePolicy::AverageJitterFree),
        _ => Err(format!("unknown tie policy `{s}` (error, average-jitter-free)")),
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Delimited file with one column per x coordinate.
    #[arg(long)]
    pub x: PathBuf,
    /// Delimited file with one column per y coordinate.
    #[arg(long)]
    pub y: PathBuf,
    #[arg(long, value_enum, default_value_t = Delimiter::Auto)]
    pub delimiter: Delimiter,
    #[arg(long, value_enum, default_value_t = HeaderMode::Auto)]
    pub header: HeaderMode,
}

impl InputArgs {
    pub fn options(&self) -> IngestOptions {
        IngestOptions {
            delimiter: self.delimiter,
            header: self.header,
        }
    }
}

#[derive(Debug, Args)]
pub struct TestOptions {
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Permutation draws for the sum-type scale estimate.
    #[arg(long = "b", default_value_t = 50)]
    pub b: usize,
    /// Use the finite-sample adjusted variants where they exist.
    #[arg(long)]
    pub adjusted: bool,
    #[arg(long, value_parser = parse_ties, default_value = "error")]
    pub ties: TiePolicy,
    /// Override κ in the max-type law of D, R and τ*.
    #[arg(long)]
    pub kappa: Option<f64>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpecSetArgs {
    /// Comma-separated: rho, tau, D, R, tau*.
    #[arg(long, value_delimiter = ',', value_parser = parse_kind, default_value = "rho,tau,D,R,tau*")]
    pub kinds: Vec<CorrelationKind>,
    /// Comma-separated: max, sum, maxsum.
    #[arg(long, value_delimiter = ',', value_parser = parse_family, default_value = "max,sum,maxsum")]
    pub families: Vec<Family>,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[arg(long, value_parser = parse_kind)]
    pub kind: CorrelationKind,
    #[arg(long, value_parser = parse_family)]
    pub family: Family,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub opts: TestOptions,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BatteryArgs {
    #[command(flatten)]
    pub set: SpecSetArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub opts: TestOptions,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML study configuration; replaces the setting and spec flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_label, required_unless_present = "config")]
    pub setting: Option<SettingLabel>,
    #[arg(long, value_parser = parse_innovation, default_value = "normal")]
    pub innovation: Innovation,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub p: usize,
    #[arg(long, default_value_t = 50)]
    pub q: usize,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    /// Sparsity level for the varying-sparsity design.
    #[arg(long)]
    pub v: Option<u32>,
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (0: all available).
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[command(flatten)]
    pub set: SpecSetArgs,
    #[command(flatten)]
    pub opts: TestOptions,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub p: usize,
    #[arg(long, default_value_t = 50)]
    pub q: usize,
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6,7")]
    pub v_grid: Vec<u32>,
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[command(flatten)]
    pub set: SpecSetArgs,
    #[command(flatten)]
    pub opts: TestOptions,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SubsampleArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_primes: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    pub repeats: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub set: SpecSetArgs,
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub opts: TestOptions,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Random rank pairs per kernel and sample size.
    #[arg(long, default_value_t = 200)]
    pub pairs: usize,
    #[arg(long, default_value_t = 8)]
    pub max_n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}
