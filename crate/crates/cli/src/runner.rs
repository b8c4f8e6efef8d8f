//! Scenario runner: orchestrates parsing, analysis dispatch, artifact
//! writing, and the exit-code contract (0 ok, 1 input error, 2 analysis
//! ran but certified nothing).

use crate::analyses::{self, RunContext};
use crate::config::{build_scenario, parse_config, AnalysisName};
use crate::error::CliError;
use crate::report::{assemble_report, to_json_string};
use crate::schema;
use dobrushin::DEFAULT_TOL;
use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};

/// Exit status of a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit status for malformed configs, dimension guards, and other errors.
pub const EXIT_INPUT_ERROR: i32 = 1;
/// Exit status when the analysis ran but no certificate exists.
pub const EXIT_NOT_CERTIFIED: i32 = 2;

/// Flags shared by `run` and the per-analysis subcommands.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Output directory; default is `<scenario>.out` beside each file.
    pub out: Option<PathBuf>,
    /// Provenance seed, overriding `params.seed`.
    pub seed: Option<u64>,
    /// Structural validation tolerance, default [`DEFAULT_TOL`].
    pub tol: Option<f64>,
    /// Attach independent cross-checks where supported.
    pub oracle: bool,
    /// Worker count when several scenario files are given.
    pub jobs: usize,
    /// Force this analysis instead of the one named in the config.
    pub analysis_override: Option<AnalysisName>,
}

/// Paths and verdict of one completed scenario run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub certified: bool,
    pub report_path: PathBuf,
    pub curve_path: Option<PathBuf>,
}

/// Where one scenario's artifacts go.
fn resolve_out_dir(config_path: &Path, opts: &RunOptions, multi: bool) -> PathBuf {
    let stem = config_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scenario".to_string());
    match (&opts.out, multi) {
        (Some(dir), false) => dir.clone(),
        (Some(dir), true) => dir.join(stem),
        (None, _) => config_path.with_file_name(format!("{stem}.out")),
    }
}

/// Run one scenario file and write its artifacts.
pub fn run_scenario_file(
    config_path: &Path,
    opts: &RunOptions,
    multi: bool,
) -> Result<RunOutcome, CliError> {
    let raw = fs::read_to_string(config_path)?;
    let mut config = parse_config(&raw)?;
    if let Some(name) = opts.analysis_override {
        config.analysis = name;
    }
    let tol = opts.tol.unwrap_or(DEFAULT_TOL);
    let scenario = build_scenario(&config, tol)?;
    let ctx = RunContext {
        oracle: opts.oracle,
        seed: opts.seed.or(config.params.seed).unwrap_or(0),
    };
    let analysis = analyses::for_name(config.analysis);
    let output = analysis.run(&scenario, &ctx)?;

    let report = assemble_report(
        analysis.name(),
        &raw,
        ctx.seed,
        output.certified,
        output.body.clone(),
    );
    check_report_schema(&report)?;

    let out_dir = resolve_out_dir(config_path, opts, multi);
    fs::create_dir_all(&out_dir)?;
    let report_path = out_dir.join("report.json");
    fs::write(&report_path, to_json_string(&report))?;
    let curve_path = match &output.curve {
        Some(curve) => {
            let path = out_dir.join("curve.csv");
            fs::write(&path, curve.to_csv())?;
            Some(path)
        }
        None => None,
    };
    Ok(RunOutcome {
        certified: output.certified,
        report_path,
        curve_path,
    })
}

/// Guard: every report this binary writes must satisfy its own schema.
fn check_report_schema(report: &Value) -> Result<(), CliError> {
    let published: Value = serde_json::from_str(schema::REPORT_SCHEMA_JSON)
        .map_err(|e| CliError::Internal(format!("report schema is unreadable: {e}")))?;
    schema::validate(&published, report)
        .map_err(|errors| CliError::Internal(format!("report fails its schema: {}", errors.join("; "))))
}

/// Run one file, printing a one-line outcome; returns the exit status.
pub fn run_file(config_path: &Path, opts: &RunOptions, multi: bool) -> i32 {
    match run_scenario_file(config_path, opts, multi) {
        Ok(outcome) if outcome.certified => {
            println!(
                "{}: ok -> {}",
                config_path.display(),
                outcome.report_path.display()
            );
            EXIT_OK
        }
        Ok(outcome) => {
            eprintln!(
                "{}: no certificate (see {})",
                config_path.display(),
                outcome.report_path.display()
            );
            EXIT_NOT_CERTIFIED
        }
        Err(err) => {
            eprintln!("{}: error: {err}", config_path.display());
            EXIT_INPUT_ERROR
        }
    }
}

/// Run several files, fanning out across `jobs` workers; the overall exit
/// status is the worst (maximum) per-file status.
pub fn run_files(paths: &[PathBuf], opts: &RunOptions) -> i32 {
    if paths.is_empty() {
        eprintln!("no scenario files given");
        return EXIT_INPUT_ERROR;
    }
    let multi = paths.len() > 1;
    let jobs = opts.jobs.max(1).min(paths.len());
    if jobs == 1 {
        return paths
            .iter()
            .map(|p| run_file(p, opts, multi))
            .max()
            .unwrap_or(EXIT_OK);
    }
    let mut worst = EXIT_OK;
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|worker| {
                scope.spawn(move || {
                    paths
                        .iter()
                        .skip(worker)
                        .step_by(jobs)
                        .map(|p| run_file(p, opts, multi))
                        .max()
                        .unwrap_or(EXIT_OK)
                })
            })
            .collect();
        for handle in handles {
            worst = worst.max(handle.join().expect("worker panicked"));
        }
    });
    worst
}

/// Print the analysis catalog: name, parameters, one-line description.
pub fn list_analyses() {
    let entries = analyses::registry();
    println!("{} analyses:", entries.len());
    for analysis in entries {
        let required = analysis.required_params().join(", ");
        let optional = analysis.optional_params().join(", ");
        let params = match (required.is_empty(), optional.is_empty()) {
            (true, true) => "-".to_string(),
            (false, true) => required,
            (true, false) => format!("[{optional}]"),
            (false, false) => format!("{required}, [{optional}]"),
        };
        println!(
            "  {:<14} params: {:<22} {}",
            analysis.name(),
            params,
            analysis.description()
        );
    }
}
