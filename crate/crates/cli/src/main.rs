//! `graphsig`: simulate aggregation experiments and export CSV results.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "graphsig", version, about = "Neighborhood aggregation experiments on Gaussian class models")]
struct Cli {
    /// Worker threads for parallel cells; outputs do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo error rates, bounds and deflections for every cell.
    Simulate(RunArgs),
    /// Grid search for the weighted-sum neighbor weight at every cell.
    OptimizeAlpha(RunArgs),
    /// Per-degree homophily statistics of a labeled graph.
    Homophily(HomophilyArgs),
    /// Sample a degree-corrected block-model graph with features.
    GenGraph(RunArgs),
    /// Class densities before and after pairwise averaging, with overlaps.
    DemoOverlap(DemoArgs),
    /// Analytic union bounds and deflections, no sampling.
    Bound(BoundArgs),
}

#[derive(Args)]
pub struct RunArgs {
    /// Experiment config (JSON), or a manifest from an earlier run.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the trials per cell (at least 1000).
    #[arg(long)]
    pub trials: Option<u64>,
}

#[derive(Args)]
pub struct HomophilyArgs {
    /// Edge list: one `u v` or `u,v` pair per line.
    #[arg(long)]
    pub edges: PathBuf,
    /// Labels: one `node label` pair per line.
    #[arg(long)]
    pub labels: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Accept nodes without labels; they are left out of the statistics.
    #[arg(long)]
    pub allow_unlabeled: bool,
}

#[derive(Args)]
pub struct DemoArgs {
    /// Optional JSON with `unimodal`, `mixture`, `priors` and `grid` overrides.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; created if missing.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct BoundArgs {
    /// Experiment config (JSON); `trials` and `seed` are ignored.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; the table goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GRAPHSIG_LOG", "warn")).init();
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers.unwrap_or(0))
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = pool.install(|| match &cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::OptimizeAlpha(a) => commands::optimize_alpha(a),
        Command::Homophily(a) => commands::homophily(a),
        Command::GenGraph(a) => commands::gen_graph(a),
        Command::DemoOverlap(a) => commands::demo_overlap(a),
        Command::Bound(a) => commands::bound(a),
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
