//! `dqc1`: reproducible DQC1 experiments from the command line.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use dqc1_sim::sampling::SamplingMode;
use dqc1_sim::sweep::SweepOutput;

use crate::error::{CliError, CliResult};
use crate::output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "dqc1",
    version,
    about = "Simulate one-clean-qubit trace estimation and its correlations"
)]
pub struct Cli {
    /// Master seed for every random stream [default: 0].
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; sweeps default to csv, reports to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sweep theta for U = Z_theta and tabulate trace, discord, tangle.
    Sweep(SweepArgs),
    /// Estimate Tr(U)/N for a unitary file with a Hoeffding shot budget.
    Trace(TraceArgs),
    /// Mutual information, both discords and tangle of a two-qubit state.
    Discord(StateArgs),
    /// Concurrence and tangle of a two-qubit state.
    Tangle(StateArgs),
    /// Simulate tomography counts or reconstruct a state from them.
    Tomo {
        #[command(subcommand)]
        action: TomoAction,
    },
    /// Check that a Clifford DQC1 circuit produces no discord.
    VerifyClifford(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// JSON sweep config; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    theta_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    theta_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Runs per quadrature; 0 for exact values.
    #[arg(long)]
    shots: Option<u64>,
    /// Comma-separated subset of trace, discord, tangle, tomo.
    #[arg(long, value_delimiter = ',')]
    outputs: Option<Vec<SweepOutput>>,
    /// Mean counts per tomography setting.
    #[arg(long)]
    mean_counts: Option<f64>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<SamplingMode>,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    /// Unitary matrix JSON {"dim", "re", "im"}.
    #[arg(long)]
    unitary: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.05)]
    p_error: f64,
    #[arg(long, value_parser = parse_mode, default_value = "binomial")]
    mode: SamplingMode,
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// Density matrix JSON {"dim", "re", "im"}.
    #[arg(long)]
    state: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum TomoAction {
    /// Draw Poisson counts for all 36 settings.
    Simulate {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = dqc1_sim::sweep::DEFAULT_MEAN_COUNTS)]
        mean_counts: f64,
    },
    /// Reconstruct a density matrix from a counts file.
    Reconstruct {
        #[arg(long)]
        counts: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Circuit JSON {"n": k, "gates": [{"g": "H", "q": 0}, ...]}.
    #[arg(long, conflicts_with = "random")]
    circuit: Option<PathBuf>,
    /// Generate a seeded random circuit on this many qubits instead.
    #[arg(long)]
    random: Option<usize>,
    /// Gate count for --random.
    #[arg(long, default_value_t = 40)]
    gates: usize,
}

fn parse_mode(s: &str) -> Result<SamplingMode, String> {
    match s.to_ascii_lowercase().as_str() {
        "binomial" => Ok(SamplingMode::Binomial),
        "poisson" => Ok(SamplingMode::Poisson),
        other => Err(format!("unknown sampling mode {other:?}")),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    #[cfg(feature = "parallel")]
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))?;
        return pool.install(|| commands::dispatch(&cli));
    }
    #[cfg(not(feature = "parallel"))]
    if cli.jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    commands::dispatch(&cli)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let err = CliError::Usage(e.render().to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
