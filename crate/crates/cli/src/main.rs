//! `jpaf`: command-line harness for the personality engine.
//!
//! Exit codes: 0 success, 1 usage or format error, 2 oracle or transport
//! failure, 3 invariant violation.

mod commands;
mod oracles;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use jpaf_core::engine::EngineError;
use thiserror::Error;

use oracles::OracleSpec;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Format(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("oracle failure: {0}")]
    Oracle(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }

    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Format(_) | CliError::Io { .. } => 1,
            CliError::Oracle(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        if e.is_oracle_failure() {
            CliError::Oracle(e.to_string())
        } else if matches!(e, EngineError::EmptyQuestions) {
            CliError::Usage(e.to_string())
        } else {
            CliError::Invariant(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "jpaf", version, about = "Jungian function weights for conversational agents")]
pub struct Cli {
    /// TOML file with [llm], [params] and [templates] defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct ParamArgs {
    /// JSON or TOML file with a, b, delta_w, decay_factor, dominance_cap.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long = "A", visible_alias = "a")]
    pub a: Option<f64>,
    #[arg(long = "B", visible_alias = "b")]
    pub b: Option<f64>,
    #[arg(long)]
    pub delta_w: Option<f64>,
    #[arg(long)]
    pub decay: Option<f64>,
    #[arg(long)]
    pub cap: Option<f64>,
}

#[derive(Debug, Args, Clone)]
pub struct OracleArgs {
    /// scripted, scripted:<function> or llm.
    #[arg(long, default_value = "scripted")]
    pub oracle: OracleSpec,
    /// Scripted approvals: always, never, or a comma list of 0/1 by question index.
    #[arg(long, default_value = "always")]
    pub approve: String,
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Print prompts and replies to stderr.
    #[arg(long)]
    pub debug: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create an agent snapshot.
    Init {
        #[arg(long)]
        mbti: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one scenario set against a snapshot, appending to a trace.
    RunScenario {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        oracle: OracleArgs,
        /// Trace file; rows are appended.
        #[arg(long)]
        out: PathBuf,
    },
    /// Answer a questionnaire as the snapshot's agent.
    Questionnaire {
        #[arg(long)]
        snapshot: PathBuf,
        #[arg(long)]
        items: PathBuf,
        #[command(flatten)]
        oracle: OracleArgs,
        #[arg(long, default_value_t = 1)]
        runs: usize,
        /// Scripted responder answers these item ids against type.
        #[arg(long, value_delimiter = ',')]
        error_mask: Vec<String>,
        /// Per-item answers, tab-separated.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-run and mean accuracies as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Compute DAG, DAR, TAA and PSA from fixture and run files.
    Report {
        /// Accuracy table file (baseline and framework conditions).
        #[arg(long)]
        accuracy: Vec<PathBuf>,
        /// Per-(type, scenario) TAA table file.
        #[arg(long)]
        taa: Vec<PathBuf>,
        /// Run trace as <TYPE>=<path>.
        #[arg(long)]
        trace: Vec<String>,
        /// Sweep results file; adds PSA and TAA.
        #[arg(long)]
        sweep: Option<PathBuf>,
        #[arg(long, default_value_t = jpaf_core::evaluation::DAR_TOLERANCE)]
        dar_tolerance: f64,
        /// Leave oracle-failed trace rows out of the TAA denominator.
        #[arg(long)]
        exclude_failed: bool,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Directory for tab-separated plot data.
        #[arg(long)]
        plot_dir: Option<PathBuf>,
    },
    /// Re-run a scenario from a starting snapshot and compare with recorded output.
    Replay {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        oracle: OracleArgs,
        #[arg(long)]
        trace: PathBuf,
        /// Expected final snapshot.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
    /// Run all 16 types against all 8 scenario sets and score PSA.
    Sweep {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory with <function>.json scenario sets; placeholder sets otherwise.
        #[arg(long)]
        scenarios: Option<PathBuf>,
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        oracle: OracleArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the expected structural outcome for every (type, target) case.
    Expectations {
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
