//! `nbldpc` command-line tool.

mod commands;
mod config;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{Method, ToolConfig};
use crate::failure::Failure;

#[derive(Debug, Parser)]
#[command(name = "nbldpc", version, about = "Non-binary LDPC binary images, stopping sets and redundant checks")]
struct Cli {
    /// Worker threads for enumeration and simulation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for construction (gen) or the channel (simulate).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON configuration file; flags override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a code and write its bundle directory.
    Gen(GenArgs),
    /// Enumerate and classify stopping sets of the basic image.
    Analyze(AnalyzeArgs),
    /// Append redundant checks to the basic image.
    Enhance(EnhanceArgs),
    /// Erasure-channel Monte-Carlo comparison of the decoders.
    Simulate(SimulateArgs),
    /// Check the built-in reference fixtures.
    VerifyPaper(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Output bundle directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the GF(8) single-check reference code (α α² 1) instead.
    #[arg(long)]
    pub example1: bool,
    /// Extension degree of GF(2^b).
    #[arg(long)]
    pub b: Option<u32>,
    /// Primitive polynomial as an integer, e.g. 11 for x³+x+1.
    #[arg(long)]
    pub poly: Option<u16>,
    /// Comma-separated rows of Φ_B(α^k) as integers.
    #[arg(long, value_delimiter = ',')]
    pub basis: Option<Vec<u8>>,
    /// Number of symbols.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub dl: Option<usize>,
    #[arg(long)]
    pub dr: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Keep all 2^b−1 choose 2 simplex checks per symbol.
    #[arg(long)]
    pub no_dedupe: bool,
}

#[derive(Debug, Args)]
pub struct BundleArg {
    /// Bundle directory written by `gen`.
    #[arg(long)]
    pub bundle: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub bundle: BundleArg,
    #[arg(long)]
    pub w_max: Option<usize>,
    /// Search budget in nodes (also NBLDPC_BUDGET).
    #[arg(long)]
    pub budget: Option<u64>,
    /// Directory for spectrum.json and spectrum.csv (default: the bundle).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnhanceArgs {
    #[command(flatten)]
    pub bundle: BundleArg,
    #[arg(long)]
    pub w_max: Option<usize>,
    /// Search budget in nodes (also NBLDPC_BUDGET).
    #[arg(long)]
    pub budget: Option<u64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Dominance {
    /// A trial where the extended residual escapes the enhanced one aborts with exit 5.
    #[default]
    Strict,
    /// Such trials are counted and reported on stderr.
    Report,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub bundle: BundleArg,
    /// Comma-separated erasure probabilities.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub max_frame_errors: Option<u64>,
    /// Comma-separated subset of nb, basic, enhanced, extended.
    #[arg(long, value_delimiter = ',')]
    pub decoders: Option<Vec<String>>,
    /// Metrics CSV path (default: metrics.csv in the bundle).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    pub dominance: Dominance,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    #[default]
    Reference,
    Default,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Field mapping the fixtures are evaluated with.
    #[arg(long, value_enum, default_value_t)]
    pub basis: BasisArg,
    /// Flip one expected bit of the named fixture.
    #[arg(long)]
    pub corrupt: Option<String>,
}

/// Settings shared by every command.
pub struct Global {
    pub seed: Option<u64>,
    pub config: ToolConfig,
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::config("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::config(e.to_string()))?;
    }
    let config = match &cli.config {
        Some(p) => ToolConfig::load(p)?,
        None => ToolConfig::default(),
    };
    let global = Global { seed: cli.seed, config };
    match cli.command {
        Command::Gen(a) => commands::gen(&global, a),
        Command::Analyze(a) => commands::analyze(&global, a),
        Command::Enhance(a) => commands::enhance(&global, a),
        Command::Simulate(a) => commands::simulate(&global, a),
        Command::VerifyPaper(a) => commands::verify_paper(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(failure::Exit::Config as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            f.code()
        }
    }
}
