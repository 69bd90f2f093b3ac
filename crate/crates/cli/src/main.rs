//! `rsbm`: generate, corrupt, solve, recover, boost and evaluate block-model
//! instances from the command line, run whole experiments and sweeps, and
//! query the lower-bound oracles.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "rsbm", version, about = "Robust partial recovery in the stochastic block model")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct GlobalArgs {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Single seed.
    #[arg(long, global = true, conflicts_with = "seeds")]
    pub seed: Option<u64>,
    /// Half-open seed range `A..B`.
    #[arg(long, global = true)]
    pub seeds: Option<String>,
    /// Output directory.
    #[arg(long, global = true, env = "RSBM_OUT")]
    pub out: Option<PathBuf>,
    /// Worker threads; all cores when absent.
    #[arg(long, global = true, env = "RSBM_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
pub struct ParamArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
}

#[derive(Subcommand)]
pub(crate) enum Command {
    /// Sample a graph and its planted partition.
    Generate {
        #[command(flatten)]
        params: ParamArgs,
        /// Poisson multigraph instead of the Bernoulli model.
        #[arg(long)]
        poisson: bool,
    },
    /// Apply an adversary to a graph.
    Corrupt {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        planted: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        /// Monotone adversary: within-cluster additions, between-cluster removals.
        #[arg(long, conflicts_with = "lower_bound")]
        monotone: bool,
        /// Two-community lower-bound adversary on a Poisson multigraph.
        #[arg(long)]
        lower_bound: bool,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[arg(long)]
        epsilon1: Option<f64>,
        #[arg(long)]
        epsilon2: Option<f64>,
        #[arg(long, default_value = "uniform")]
        strategy: String,
        /// Monotone additions as a fraction of m.
        #[arg(long, default_value_t = 0.0)]
        add_fraction: f64,
        /// Monotone removals as a fraction of m.
        #[arg(long, default_value_t = 0.0)]
        remove_fraction: f64,
        /// Cut monotone requests down to the available pairs.
        #[arg(long)]
        clamp: bool,
        /// |L'|/n for the lower-bound adversary; suggested from epsilon when absent.
        #[arg(long)]
        rho_fraction: Option<f64>,
    },
    /// Solve the relaxation for a graph.
    Solve {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Round an embedding into clusters.
    Recover {
        #[arg(long)]
        embedding: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        rho: Option<f64>,
        /// Planted partition, for the closeness report.
        #[arg(long)]
        planted: Option<PathBuf>,
    },
    /// Split the edges, recover on one half and vote with the other.
    Boost {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        /// Base partition to boost instead of solving on the first half.
        #[arg(long)]
        base: Option<PathBuf>,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        planted: Option<PathBuf>,
    },
    /// Compare a partition with the planted one and evaluate the bounds.
    Evaluate {
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        planted: PathBuf,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
    },
    /// Poisson coupling, the distinguishing game and the impossibility bounds.
    Lowerbound {
        /// Exact overlap of Poisson(L1) and Poisson(L2).
        #[arg(long, num_args = 2, value_names = ["L1", "L2"])]
        coupling: Option<Vec<f64>>,
        /// Monte Carlo distinguishing game at rates L1, L2.
        #[arg(long, num_args = 2, value_names = ["L1", "L2"])]
        game: Option<Vec<f64>>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Impossibility bounds at target error DELTA for the given params.
        #[arg(long, value_name = "DELTA")]
        bounds: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Run a full experiment from a configuration.
    Run,
    /// Run a grid of experiments; resumes from the rows already in --out.
    Sweep {
        /// Sweep grid (JSON).
        #[arg(long)]
        grid: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::dispatch(cli.command, &cli.global) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
