//! `relplan`: release planning from the terminal.

mod fail;
mod local;
mod remote;
mod render;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::fail::Failure;

#[derive(Debug, Parser)]
#[command(
    name = "relplan",
    version,
    about = "Iterative release planning with UCP estimates and feedback"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlanFormat {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchFormat {
    Csv,
}

/// Planner knobs shared by the local and remote `plan` commands.
#[derive(Debug, Clone, clap::Args)]
pub struct PlanArgs {
    /// Time budget of the increment, in hours.
    #[arg(long)]
    pub t_max: f64,
    /// Replaces the project's random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of ranked solutions to keep.
    #[arg(long)]
    pub k_best: Option<usize>,
    /// Trade-off weight; repeat for several.
    #[arg(long = "alpha")]
    pub alphas: Vec<f64>,
    #[arg(long, value_enum, default_value = "table")]
    pub out: PlanFormat,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the UCP breakdown and per-requirement hours of a project file.
    Estimate {
        file: PathBuf,
        /// Store the computed hours for requirements that have none.
        #[arg(long)]
        write: bool,
    },
    /// Rank the candidate releases of the project's open iteration.
    Plan {
        file: PathBuf,
        #[command(flatten)]
        args: PlanArgs,
    },
    /// Compute the feedback factor of a finished release.
    Feedback {
        #[arg(long)]
        actual: f64,
        #[arg(long)]
        estimated: f64,
        #[arg(long)]
        failed: u32,
        #[arg(long)]
        implemented: u32,
        /// User perception in [0, 1].
        #[arg(long)]
        up: f64,
    },
    /// Time exhaustive enumeration plus filtering for a range of sizes.
    Bench {
        #[arg(long, default_value_t = 10)]
        n_min: usize,
        #[arg(long, default_value_t = 22)]
        n_max: usize,
        #[arg(long, value_enum, default_value = "csv")]
        out: BenchFormat,
    },
    /// Run the HTTP service until interrupted.
    Serve {
        #[arg(long, env = relplan_server::ADDR_ENV, default_value = relplan_server::DEFAULT_ADDR)]
        addr: SocketAddr,
        #[arg(long, env = relplan_server::DATA_DIR_ENV, default_value = relplan_server::DEFAULT_DATA_DIR)]
        data_dir: PathBuf,
        /// Built web UI to serve next to the API.
        #[arg(long)]
        static_dir: Option<PathBuf>,
    },
    /// Drive a running service.
    Remote(remote::RemoteArgs),
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Estimate { file, write } => local::estimate(&file, write),
        Command::Plan { file, args } => local::plan(&file, &args),
        Command::Feedback {
            actual,
            estimated,
            failed,
            implemented,
            up,
        } => local::feedback(actual, estimated, failed, implemented, up),
        Command::Bench {
            n_min,
            n_max,
            out: BenchFormat::Csv,
        } => local::bench(n_min, n_max),
        Command::Serve {
            addr,
            data_dir,
            static_dir,
        } => serve(relplan_server::ServerConfig {
            addr,
            data_dir,
            static_dir,
        }),
        Command::Remote(args) => remote::run(args),
    }
}

fn serve(cfg: relplan_server::ServerConfig) -> Result<(), Failure> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let rt = tokio::runtime::Runtime::new().map_err(Failure::io)?;
    rt.block_on(relplan_server::run(cfg)).map_err(Failure::io)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(fail::VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
