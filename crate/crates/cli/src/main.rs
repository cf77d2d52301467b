//! `rdfrank` — prepare relational layouts of an RDF dataset, time a SQL
//! workload over every configuration, and turn the latency logs into
//! rankings, quality metrics, and report files.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod report;

use commands::Ctx;

#[derive(Parser)]
#[command(
    name = "rdfrank",
    version,
    about = "Rank relational RDF layouts by benchmark latency"
)]
struct Cli {
    /// Experiment configuration YAML
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Root directory for prepared data, logs, and reports
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Reserved for future stochastic criteria; currently ignored
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Drop each (configuration, query) pair's first run before averaging
    #[arg(long, global = true)]
    discard_first: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate, partition, and serialize every configuration's tables
    Prepare {
        /// N-Triples input file
        input: PathBuf,
        /// Skip malformed lines instead of failing
        #[arg(long)]
        lenient: bool,
    },
    /// Execute the workload over prepared data and write a latency log
    Run {
        /// Workload YAML mapping query ids to per-schema SQL
        #[arg(long)]
        workload: PathBuf,
        /// Log CSV destination (default: <out>/logs/<dataset>.csv)
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Aggregate a latency log into the result matrix CSV
    Ingest {
        /// Latency log CSV
        log: PathBuf,
    },
    /// Rank configurations and write CSVs, top-k tables, and plots
    Rank {
        /// Latency log CSV
        log: PathBuf,
        /// Comma-separated criteria: sd:<dimension>, pareto_q, pareto_agg,
        /// rta (default: all that fit the space)
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<String>,
        /// Rows in the top-k table
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Rank-occurrence aggregator: mean, min, or median
        #[arg(long, default_value = "mean")]
        agg: String,
    },
    /// Conformance of each criterion, plus coherence given a second log
    Evaluate {
        /// Latency log CSV
        log: PathBuf,
        /// Second log over the same space, e.g. from another scale
        log_b: Option<PathBuf>,
        /// Comma-separated criteria (default: all that fit the space)
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<String>,
        /// Head size whose trustworthiness is scored
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Per-query tail size that counts as a violation
        #[arg(long, default_value_t = 3)]
        h: usize,
        /// Rank-occurrence aggregator: mean, min, or median
        #[arg(long, default_value = "mean")]
        agg: String,
    },
    /// Head-to-head win rates of two options of one dimension
    Replicability {
        /// Latency log CSV
        log: PathBuf,
        /// Dimension holding both options
        #[arg(long)]
        dimension: String,
        /// Challenger option
        #[arg(long)]
        option_a: String,
        /// Baseline option
        #[arg(long)]
        option_b: String,
        /// Split rows by this dimension's options
        #[arg(long)]
        group_by: Option<String>,
    },
    /// Full report: matrix, rankings, plots, global and impact tables
    Report {
        /// Latency log CSV
        log: PathBuf,
        /// Rows in the top-k tables
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Rank-occurrence aggregator: mean, min, or median
        #[arg(long, default_value = "mean")]
        agg: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(seed) = cli.seed {
        eprintln!("note: --seed {seed} is reserved for future stochastic criteria; ignored");
    }
    let ctx = Ctx {
        config: cli.config.as_deref(),
        out: &cli.out,
        discard_first: cli.discard_first,
    };
    let result = match &cli.command {
        Command::Prepare { input, lenient } => commands::prepare(&ctx, input, *lenient),
        Command::Run { workload, log } => commands::run(&ctx, workload, log.as_deref()),
        Command::Ingest { log } => commands::ingest(&ctx, log),
        Command::Rank {
            log,
            criteria,
            k,
            agg,
        } => commands::rank(&ctx, log, criteria, *k, agg),
        Command::Evaluate {
            log,
            log_b,
            criteria,
            k,
            h,
            agg,
        } => commands::evaluate(&ctx, log, log_b.as_deref(), criteria, *k, *h, agg),
        Command::Replicability {
            log,
            dimension,
            option_a,
            option_b,
            group_by,
        } => commands::replicability(&ctx, log, dimension, option_a, option_b, group_by.as_deref()),
        Command::Report { log, k, agg } => commands::report(&ctx, log, *k, agg),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
