//! Command-line front end: synthetic data generation, exact and empirical
//! OCTE analyses, and the XOR information table.
//!
//! Every command writes its human-readable output to a caller-supplied
//! writer; [`run`] resolves the worker pool and dispatches.

mod analyze;
mod binarize;
mod exact;
mod generate;
mod manifest;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use octe_core::systems::Builtin;
use octe_core::OcteError;
use thiserror::Error;

pub use analyze::{cmd_analyze, AnalyzeArgs, AnalyzeOutcome, TargetSpec};
pub use binarize::{cmd_binarize, BinarizeArgs};
pub use exact::{
    cmd_exact, cmd_table1, exact_report, table1, two_source_functionals, ExactArgs, ExactReport, MediatedInformation,
    SourceSummary, Table1Args, Table1Case, TargetAnalysis, FUNCTIONAL_LABELS, TABLE1_EXPECTED, TABLE1_TOLERANCE,
};
pub use generate::{cmd_generate, GenerateArgs};
pub use manifest::{FileDigest, RunManifest};

/// Stable process exit codes.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const FAILURE: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const CAPACITY: u8 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{0}\nhint: lower --k-max, pass --max-condition-size, or reduce the number of candidate sources")]
    Capacity(OcteError),

    #[error(transparent)]
    Core(OcteError),

    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl From<OcteError> for CliError {
    fn from(e: OcteError) -> Self {
        match e {
            OcteError::Capacity(_) => CliError::Capacity(e),
            e => CliError::Core(e),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(OcteError::Io(e))
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Capacity(_) => exit::CAPACITY,
            CliError::Core(e) => match e {
                OcteError::UnknownVariable(_)
                | OcteError::Argument(_)
                | OcteError::Domain(_)
                | OcteError::Parse { .. } => exit::USAGE,
                OcteError::Capacity(_) => exit::CAPACITY,
                _ => exit::FAILURE,
            },
            CliError::Pool(_) => exit::FAILURE,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "octe",
    version,
    about = "Causal hypergraph inference with optimally conditioned transfer entropy"
)]
pub struct Cli {
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long, global = true, env = "OCTE_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a builtin or user-specified system to CSV.
    Generate(GenerateArgs),
    /// Infer a causal hypergraph from a CSV with permutation tests.
    Analyze(AnalyzeArgs),
    /// Exact information functionals and OCTE decisions of a builtin system.
    Exact(ExactArgs),
    /// Reproduce the three-case XOR information table.
    Table1(Table1Args),
    /// Turn event-time files into a binary window CSV.
    Binarize(BinarizeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SystemName {
    Xor,
    Parity,
    Additive,
    MediatedXor,
    NeuronXor,
}

/// Parameters of the builtin systems; each system reads only its own.
#[derive(Clone, Debug, Args)]
pub struct SystemParams {
    /// P(X1 = 1) for xor.
    #[arg(long, default_value_t = 0.5)]
    pub p1: f64,
    /// P(X2 = 1) for xor.
    #[arg(long, default_value_t = 0.5)]
    pub p2: f64,
    /// Number of parity inputs.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Number of independent sources in mediated-xor.
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    /// Total number of sources in mediated-xor.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Flip probability of Y in neuron-xor.
    #[arg(long, default_value_t = 0.1)]
    pub eps_y: f64,
    /// Flip probability of Z in neuron-xor.
    #[arg(long, default_value_t = 0.1)]
    pub eps_z: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            p1: 0.5,
            p2: 0.5,
            k: 3,
            p: 2,
            n: 3,
            eps_y: 0.1,
            eps_z: 0.1,
        }
    }
}

impl SystemParams {
    pub fn builtin(&self, name: SystemName) -> Builtin {
        match name {
            SystemName::Xor => Builtin::Xor {
                p1: self.p1,
                p2: self.p2,
            },
            SystemName::Parity => Builtin::Parity { k: self.k },
            SystemName::Additive => Builtin::Additive,
            SystemName::MediatedXor => Builtin::MediatedXor { p: self.p, n: self.n },
            SystemName::NeuronXor => Builtin::NeuronXor {
                eps_y: self.eps_y,
                eps_z: self.eps_z,
            },
        }
    }

    /// The parameters `name` actually reads, as JSON.
    pub(crate) fn describe(&self, name: SystemName) -> serde_json::Value {
        use serde_json::json;
        match name {
            SystemName::Xor => json!({ "p1": self.p1, "p2": self.p2 }),
            SystemName::Parity => json!({ "k": self.k }),
            SystemName::Additive => json!({}),
            SystemName::MediatedXor => json!({ "p": self.p, "n": self.n }),
            SystemName::NeuronXor => json!({ "eps_y": self.eps_y, "eps_z": self.eps_z }),
        }
    }
}

/// Runs `cli` on a worker pool sized by `--threads` / `OCTE_THREADS`.
pub fn run(cli: Cli, out: &mut (dyn Write + Send)) -> CliResult<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()?;
    pool.install(|| match cli.command {
        Command::Generate(args) => cmd_generate(&args, out).map(drop),
        Command::Analyze(args) => cmd_analyze(&args, out).map(drop),
        Command::Exact(args) => cmd_exact(&args, out),
        Command::Table1(args) => cmd_table1(&args, out).map(drop),
        Command::Binarize(args) => cmd_binarize(&args, out).map(drop),
    })
}

/// Creates the directory that will hold `path`.
pub(crate) fn ensure_parent(path: &std::path::Path) -> std::io::Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => std::fs::create_dir_all(dir),
        _ => Ok(()),
    }
}

/// `dir/stem.<suffix>` for an output path `dir/stem.ext`.
pub(crate) fn sibling(path: &std::path::Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}
