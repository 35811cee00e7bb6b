mod commands;
mod render;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use carpet_lab::report::SCHEMA;

/// Smallest accepted `--precision`.
pub const MIN_PRECISION: u32 = 16;

#[derive(Parser, Debug)]
#[command(name = "carpet-lab", version, about = "Doubling indices and Lipschitz invariants of Bedford-McMullen carpets")]
pub struct Cli {
    /// Significant decimal digits for high-precision output.
    #[arg(long, global = true, env = "CARPET_LAB_PRECISION", default_value_t = 50)]
    pub precision: u32,
    /// Worker threads for the parallel oracle and sampling code.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Write the main artifact here instead of standard output.
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum IndexKind {
    DeltaUpper,
    DeltaLower,
    Gamma,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum YesNo {
    Yes,
    No,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Invariant profile of one carpet.
    Analyze {
        carpet: PathBuf,
        #[arg(long, default_value_t = carpet_lab::classify::DEFAULT_TOPOLOGY_DEPTH)]
        topology_depth: u32,
    },
    /// Point-wise index of a coded point.
    Index {
        carpet: PathBuf,
        coding: PathBuf,
        /// `neglog`, `loglog` or `file` (with `--table` and `--s`).
        #[arg(long, default_value = "neglog")]
        gauge: String,
        #[arg(long)]
        table: Option<PathBuf>,
        /// Declared `lim k / phi(n^-k)` for a tabulated gauge.
        #[arg(long)]
        s: Option<String>,
        #[arg(long, default_value_t = 1000)]
        depth: u64,
        #[arg(long, value_enum, default_value = "delta-upper")]
        index: IndexKind,
        /// Also write `k,beta,value` rows here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Reverse run lengths as CSV.
    Beta {
        carpet: PathBuf,
        coding: PathBuf,
        #[arg(long, default_value_t = 100)]
        depth: u64,
    },
    /// Certified ball measures and the sandwich checks at one point.
    Oracle {
        carpet: PathBuf,
        #[arg(long, conflicts_with = "point", required_unless_present = "point")]
        coding: Option<PathBuf>,
        /// `p/q,p/q`.
        #[arg(long)]
        point: Option<String>,
        #[arg(long)]
        r: String,
        #[arg(long)]
        rho: String,
        /// Defaults to `k(rho r) + 6`.
        #[arg(long)]
        depth: Option<u64>,
    },
    /// Necessary conditions for bi-Lipschitz equivalence of two carpets.
    Compare {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, value_enum)]
        assume_t: Option<YesNo>,
        #[arg(long, default_value_t = carpet_lab::classify::DEFAULT_TOPOLOGY_DEPTH)]
        topology_depth: u32,
        /// Exit with status 2 on an indeterminate verdict.
        #[arg(long)]
        strict: bool,
    },
    /// Monte Carlo run-length statistics for uniform random codings.
    Sample {
        carpet: PathBuf,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long, default_value_t = 1_000_000)]
        depth: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Explicit codings with prescribed run lengths.
    Curve {
        carpet: PathBuf,
        /// `t'` in `[0, 1/sigma - 1]`.
        #[arg(long, conflicts_with = "gamma", required_unless_present = "gamma")]
        t: Option<String>,
        /// Build the coding that attains `gamma_max`.
        #[arg(long)]
        gamma: bool,
        #[arg(long, default_value_t = 10_000)]
        depth: u64,
        #[arg(long)]
        p1: Option<u64>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// SVG of the rank-`depth` cylinders.
    Render {
        carpet: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: u32,
        /// Mark a `V_E` witness point.
        #[arg(long)]
        overlay: bool,
        /// Decimal places for coordinates.
        #[arg(long, default_value_t = 10)]
        places: u32,
    },
}

/// A failure reported as JSON on standard error.
#[derive(Debug)]
pub struct CliError {
    pub code: String,
    pub message: String,
}

impl CliError {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        CliError { code: code.into(), message: message.into() }
    }
}

impl From<carpet_lab::Error> for CliError {
    fn from(e: carpet_lab::Error) -> Self {
        CliError { code: e.code().into(), message: e.to_string() }
    }
}

macro_rules! from_module_error {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                carpet_lab::Error::from(e).into()
            }
        })*
    };
}

from_module_error!(
    carpet_lab::error::CarpetError,
    carpet_lab::error::CodingError,
    carpet_lab::error::RunLengthError,
    carpet_lab::error::MeasureError,
    carpet_lab::error::IndexError,
    carpet_lab::error::ClassifyError
);

#[derive(Serialize)]
struct ErrorDoc<'a> {
    schema: &'a str,
    code: &'a str,
    message: &'a str,
}

/// Result of a command: the bytes of the main artifact and the exit status.
pub struct Artifact {
    pub bytes: Vec<u8>,
    pub status: u8,
}

fn run(cli: Cli) -> Result<Artifact, CliError> {
    if cli.precision < MIN_PRECISION {
        return Err(CliError::new(
            "cli.bad_precision",
            format!("precision must be at least {MIN_PRECISION}, got {}", cli.precision),
        ));
    }
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::new("cli.bad_jobs", "--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::new("cli.bad_jobs", e.to_string()))?;
    }
    commands::dispatch(&cli)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report_error(&CliError::new("cli.usage", e.to_string().trim_end()));
            return ExitCode::from(1);
        }
    };
    let output = cli.output.clone();
    match run(cli) {
        Ok(artifact) => {
            let written = match &output {
                Some(path) => std::fs::write(path, &artifact.bytes),
                None => std::io::stdout().write_all(&artifact.bytes),
            };
            if let Err(e) = written {
                report_error(&CliError::new("cli.io", e.to_string()));
                return ExitCode::from(1);
            }
            ExitCode::from(artifact.status)
        }
        Err(e) => {
            report_error(&e);
            ExitCode::from(1)
        }
    }
}

fn report_error(e: &CliError) {
    let doc = ErrorDoc { schema: SCHEMA, code: &e.code, message: &e.message };
    eprintln!("{}", serde_json::to_string(&doc).expect("error document serializes"));
}
