//! Command-line front end.
//!
//! Each experiment subcommand writes one CSV document (to `--out` or standard
//! output) and logs progress to standard error. Exit codes: 0 on success,
//! 1 on runtime failure, 2 on invalid arguments.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::csv;
use crate::error::Error;
use crate::experiments::{
    estimation_error_binned, run_convergence, run_error_curve, run_hybrid_study, speed_benchmark,
    trials_to_threshold, ExperimentConfig, PayoffModel, TreeSpec, WidthRange, WidthSpec,
};
use crate::extremum::{Combiner, FunctionMode};
use crate::policy::{Policy, PolicyKind};
use crate::selftest::run_selftest;
use crate::tree::Backend;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "bayes-mcts",
    version,
    about = "Bayesian MCTS bandit-tree experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Greedy decision error against trials, per algorithm.
    Curve(ExperimentArgs),
    /// Trials needed to reach the error threshold.
    Table1(ExperimentArgs),
    /// Top-level estimation error binned by visit count.
    Fig4a(ExperimentArgs),
    /// UCT, Bayes-UCT2 and the UCT-sampling hybrid.
    Hybrid(ExperimentArgs),
    /// Raw and playout-adjusted throughput.
    Bench(ExperimentArgs),
    /// Final root estimates of long single runs.
    Converge(ExperimentArgs),
    /// Fast numerical self-checks.
    Selftest,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PayoffArg {
    Uniform,
    Gaussian,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BackendArg {
    Gaussian,
    Numeric,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CombinerArg {
    Random,
    Minerr,
}

fn parse_algorithm(s: &str) -> Result<PolicyKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_width_range(s: &str) -> Result<WidthRange, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    /// Master seed for trees and trials.
    #[arg(long)]
    pub seed: u64,
    /// Number of interior levels.
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
    /// Common width of every interior node.
    #[arg(long, conflicts_with_all = ["width_range", "root_width_range"])]
    pub width: Option<usize>,
    /// Random width range `lo:hi` for non-root interior nodes.
    #[arg(long, value_parser = parse_width_range)]
    pub width_range: Option<WidthRange>,
    /// Random width range `lo:hi` for the root (defaults to --width-range).
    #[arg(long, value_parser = parse_width_range, requires = "width_range")]
    pub root_width_range: Option<WidthRange>,
    #[arg(long, value_enum, default_value = "uniform")]
    pub payoffs: PayoffArg,
    /// Comma-separated algorithms: uct, bayes1, bayes2, random, hybrid.
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm, default_value = "uct,bayes2")]
    pub algos: Vec<PolicyKind>,
    #[arg(long, value_enum, default_value = "gaussian")]
    pub backend: BackendArg,
    #[arg(long, default_value_t = 1000)]
    pub trees: usize,
    #[arg(long, default_value_t = 1000)]
    pub max_trials: u64,
    #[arg(long, default_value_t = 10)]
    pub eval_every: u64,
    #[arg(long, default_value_t = 0.01)]
    pub threshold: f64,
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "random")]
    pub combiner: CombinerArg,
    #[arg(long, default_value_t = crate::belief::DEFAULT_GRID_POINTS)]
    pub grid_points: usize,
    /// Evaluate normal functions exactly instead of through lookup tables.
    #[arg(long)]
    pub exact: bool,
    /// Seconds per playout for adjusted throughput.
    #[arg(long, default_value_t = 1e-4)]
    pub payout_cost: f64,
    /// Worker threads (results do not depend on this).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Suppress progress messages.
    #[arg(long)]
    pub quiet: bool,
}

impl ExperimentArgs {
    pub fn backend(&self) -> Backend {
        match self.backend {
            BackendArg::Gaussian => Backend::Gaussian,
            BackendArg::Numeric => Backend::Numeric,
        }
    }

    pub fn tree_spec(&self) -> TreeSpec {
        let width = match (self.width, self.width_range) {
            (_, Some(lower)) => WidthSpec::Random {
                root: self.root_width_range.unwrap_or(lower),
                lower,
            },
            (Some(w), None) => WidthSpec::Fixed(w),
            (None, None) => WidthSpec::Fixed(5),
        };
        TreeSpec {
            depth: self.depth,
            width,
            payoffs: match self.payoffs {
                PayoffArg::Uniform => PayoffModel::Uniform,
                PayoffArg::Gaussian => PayoffModel::Gaussian,
            },
        }
    }

    /// Builds and validates the experiment description.
    pub fn config(&self) -> Result<ExperimentConfig, Error> {
        let backend = self.backend();
        let algorithms = self
            .algos
            .iter()
            .map(|&k| Policy::new(k, backend))
            .collect();
        let mut config = ExperimentConfig::new(self.tree_spec(), algorithms, self.seed);
        config.num_trees = self.trees;
        config.max_trials = self.max_trials;
        config.eval_every = self.eval_every;
        config.error_threshold = self.threshold;
        config.payout_cost_sec = self.payout_cost;
        config.combiner = match self.combiner {
            CombinerArg::Random => Combiner::RandomOrder,
            CombinerArg::Minerr => Combiner::MinError,
        };
        config.functions = if self.exact {
            FunctionMode::Exact
        } else {
            FunctionMode::Tables
        };
        config.grid_points = self.grid_points;
        config.jobs = self.jobs;
        config.progress_every = if self.quiet {
            0
        } else {
            (self.trees / 10).max(1)
        };
        if !(self.threshold.is_finite() && self.threshold >= 0.0) {
            return Err(Error::InvalidSpec("threshold must be non-negative".into()));
        }
        if !(self.payout_cost.is_finite() && self.payout_cost >= 0.0) {
            return Err(Error::InvalidSpec(
                "payout cost must be non-negative".into(),
            ));
        }
        if self.jobs == Some(0) {
            return Err(Error::InvalidSpec("--jobs must be positive".into()));
        }
        config.validate()?;
        Ok(config)
    }
}

/// Parses arguments (including the program name) into an invocation.
pub fn parse_args<I, T>(argv: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Cli::try_parse_from(argv)
}

fn render(command: &Command, argv: &str) -> Result<String, Error> {
    let argv = Some(argv);
    Ok(match command {
        Command::Curve(a) => csv::curves(argv, &run_error_curve(&a.config()?)?),
        Command::Table1(a) => {
            let config = a.config()?;
            let rows = trials_to_threshold(&config)?;
            csv::table1(argv, &config.tree_spec, config.max_trials, &rows)
        }
        Command::Fig4a(a) => csv::fig4a(argv, &estimation_error_binned(&a.config()?)?),
        Command::Hybrid(a) => csv::curves(argv, &run_hybrid_study(&a.config()?, a.backend())?),
        Command::Bench(a) => csv::bench(argv, &speed_benchmark(&a.config()?)?),
        Command::Converge(a) => csv::convergence(argv, &run_convergence(&a.config()?)?),
        Command::Selftest => unreachable!("selftest is not a CSV command"),
    })
}

fn init_logging(quiet: bool) {
    let level = if quiet {
        log::LevelFilter::Off
    } else {
        log::LevelFilter::Info
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .format_timestamp(None)
        .try_init();
}

/// Runs a parsed invocation and returns the process exit code.
pub fn run(cli: &Cli, argv_echo: &str) -> i32 {
    let args = match &cli.command {
        Command::Selftest => {
            let report = run_selftest();
            print!("{}", report.render());
            return if report.passed() {
                EXIT_OK
            } else {
                EXIT_FAILURE
            };
        }
        Command::Curve(a)
        | Command::Table1(a)
        | Command::Fig4a(a)
        | Command::Hybrid(a)
        | Command::Bench(a)
        | Command::Converge(a) => a,
    };
    init_logging(args.quiet);
    if let Err(e) = args.config() {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    let text = match render(&cli.command, argv_echo) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAILURE;
        }
    };
    let written = match &args.out {
        Some(path) => std::fs::write(path, text.as_bytes()),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    match written {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            EXIT_FAILURE
        }
    }
}

/// Entry point shared by the binary: parse, run, return the exit code.
pub fn main_with_args(argv: Vec<String>) -> i32 {
    let echo = std::iter::once("bayes-mcts")
        .chain(argv.iter().skip(1).map(String::as_str))
        .collect::<Vec<_>>()
        .join(" ");
    match parse_args(&argv) {
        Ok(cli) => run(&cli, &echo),
        Err(e) => {
            let _ = e.print();
            match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_USAGE,
            }
        }
    }
}
