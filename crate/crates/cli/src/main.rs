//! `dobrushin` binary: subcommand per analysis plus `run` and `list`.

use clap::{Args, Parser, Subcommand};
use dobrushin_cli::config::AnalysisName;
use dobrushin_cli::runner::{self, RunOptions};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "dobrushin",
    version,
    about = "Certified ergodicity analysis for finite Markov semigroups",
    after_help = "Exit status: 0 ok, 1 input error, 2 analysis ran but certified nothing.\n\
                  With several scenario files the exit status is the worst per-file status."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario files (JSON, see schemas/scenario.schema.json).
    #[arg(required = true)]
    configs: Vec<PathBuf>,

    /// Output directory (default: `<scenario>.out` beside each file).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Provenance seed recorded in the report (overrides params.seed).
    #[arg(long)]
    seed: Option<u64>,

    /// Structural validation tolerance (default 1e-9).
    #[arg(long)]
    tol: Option<f64>,

    /// Attach an independent cross-check where the analysis supports one.
    #[arg(long)]
    oracle: bool,

    /// Parallel workers when several scenario files are given.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run the analysis named inside each scenario file.
    Run(RunArgs),
    /// List the registered analyses and their parameters.
    List,
    /// Run scenarios with the analysis forced to `delta`.
    Delta(RunArgs),
    /// Run scenarios with the analysis forced to `certify`.
    Certify(RunArgs),
    /// Run scenarios with the analysis forced to `mean`.
    Mean(RunArgs),
    /// Run scenarios with the analysis forced to `weak_mean`.
    #[command(name = "weak_mean")]
    WeakMean(RunArgs),
    /// Run scenarios with the analysis forced to `doeblin`.
    Doeblin(RunArgs),
    /// Run scenarios with the analysis forced to `ergodize`.
    Ergodize(RunArgs),
    /// Run scenarios with the analysis forced to `rho`.
    Rho(RunArgs),
    /// Run scenarios with the analysis forced to `spectral`.
    Spectral(RunArgs),
    /// Run scenarios with the analysis forced to `qubit_example`.
    #[command(name = "qubit_example")]
    QubitExample(RunArgs),
}

fn options(args: &RunArgs, analysis_override: Option<AnalysisName>) -> RunOptions {
    RunOptions {
        out: args.out.clone(),
        seed: args.seed,
        tol: args.tol,
        oracle: args.oracle,
        jobs: args.jobs,
        analysis_override,
    }
}

fn main() {
    // Usage errors are input errors (exit 1); clap's default of 2 would
    // collide with the "ran but certified nothing" status.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() {
                runner::EXIT_INPUT_ERROR
            } else {
                runner::EXIT_OK
            };
            err.print().expect("write clap diagnostics");
            std::process::exit(code);
        }
    };
    let code = match &cli.command {
        Command::List => {
            runner::list_analyses();
            runner::EXIT_OK
        }
        Command::Run(args) => runner::run_files(&args.configs, &options(args, None)),
        Command::Delta(args) => {
            runner::run_files(&args.configs, &options(args, Some(AnalysisName::Delta)))
        }
        Command::Certify(args) => {
            runner::run_files(&args.configs, &options(args, Some(AnalysisName::Certify)))
        }
        Command::Mean(args) => {
            runner::run_files(&args.configs, &options(args, Some(AnalysisName::Mean)))
        }
        Command::WeakMean(args) => {
            runner::run_files(&args.configs, &options(args, Some(AnalysisName::WeakMean)))
        }
        Command::Doeblin(args) => {
            runner::run_files(&args.configs, &options(args, Some(AnalysisName::Doeblin)))
        }
        Command::Ergodize(args) => {
            runner::run_files(&args.configs, &options(args, Some(AnalysisName::Ergodize)))
        }
        Command::Rho(args) => {
            runner::run_files(&args.configs, &options(args, Some(AnalysisName::Rho)))
        }
        Command::Spectral(args) => {
            runner::run_files(&args.configs, &options(args, Some(AnalysisName::Spectral)))
        }
        Command::QubitExample(args) => runner::run_files(
            &args.configs,
            &options(args, Some(AnalysisName::QubitExample)),
        ),
    };
    std::process::exit(code);
}
