//! Analysis registry: one trait object per analysis, dispatching scenario
//! objects into the core library and shaping the results for reports.

use crate::config::{AnalysisName, Scenario};
use crate::error::CliError;
use crate::report::{fmt_float, CurveData};
use dobrushin::linalg::max_abs;
use dobrushin::{
    certify_mean, certify_uniform, decay_envelope, delta_auto, delta_bracket, delta_strategy,
    delta_vertex_enum, doeblin_check, ergodize, example_report, induced_norm, phi, projection_p,
    rho_r, spectral_check, ume_bound, weak_mean_check, Certificate, CertifyOutcome, DeltaMethod,
    DeltaOptions, DeltaStrategy, MetricValue, SemigroupKind, StateSpace,
};
use serde_json::{json, Value};

/// Ambient flags and provenance for one run.
#[derive(Debug, Clone, Copy)]
pub struct RunContext {
    /// Attach an independent cross-check where the analysis supports one.
    pub oracle: bool,
    /// Seed recorded in the report's provenance block.
    pub seed: u64,
}

/// What one analysis produced: a report body, an optional curve artifact,
/// and whether the run certified its statement (exit status 2 otherwise).
#[derive(Debug, Clone)]
pub struct AnalysisOutput {
    pub body: Value,
    pub curve: Option<CurveData>,
    pub certified: bool,
}

/// One runnable analysis.
pub trait Analysis: Sync {
    /// Stable name matching scenario files and subcommands.
    fn name(&self) -> &'static str;
    /// One-line description for the catalog.
    fn description(&self) -> &'static str;
    /// Params that must be present in the scenario.
    fn required_params(&self) -> &'static [&'static str];
    /// Optional params the analysis reads, for the catalog.
    fn optional_params(&self) -> &'static [&'static str];
    /// Run against a built scenario.
    fn run(&self, scenario: &Scenario, ctx: &RunContext) -> Result<AnalysisOutput, CliError>;
}

static REGISTRY: [&dyn Analysis; 9] = [
    &DeltaAnalysis,
    &CertifyAnalysis,
    &MeanAnalysis,
    &WeakMeanAnalysis,
    &DoeblinAnalysis,
    &ErgodizeAnalysis,
    &RhoAnalysis,
    &SpectralAnalysis,
    &QubitExampleAnalysis,
];

/// All registered analyses, in catalog order.
pub fn registry() -> &'static [&'static dyn Analysis] {
    &REGISTRY
}

/// Look up the implementation behind a config-level analysis name.
pub fn for_name(name: AnalysisName) -> &'static dyn Analysis {
    let found = REGISTRY.iter().find(|a| a.name() == name.label());
    *found.expect("every config analysis name is registered")
}

fn require_f64(value: Option<f64>, name: &str, analysis: &str) -> Result<f64, CliError> {
    value.ok_or_else(|| {
        CliError::Input(format!("the {analysis} analysis requires params.{name}"))
    })
}

fn auto_strategy() -> &'static dyn DeltaStrategy {
    delta_strategy("auto").expect("the auto strategy is registered")
}

fn method_label(method: DeltaMethod) -> &'static str {
    match method {
        DeltaMethod::BlockExact => "block-exact",
        DeltaMethod::VertexEnumeration => "vertex-enum",
        DeltaMethod::PairFormula => "pair-formula",
        DeltaMethod::Bracket => "bracket",
    }
}

fn certificate_json(cert: &Certificate) -> Value {
    json!({
        "mode": cert.mode.label(),
        "t0": cert.t0,
        "q": cert.q,
        "c": cert.c,
        "alpha": cert.alpha,
        "tau": cert.tau,
        "n0": cert.n0,
        "max_phi_norm": cert.max_phi_norm,
        "projection": cert.projection,
        "grid": cert.grid,
        "measured_curve": cert.measured_curve,
    })
}

fn metric_json(metric: &MetricValue) -> Value {
    json!({
        "value": metric.value,
        "certified_error": metric.certified_error,
        "parameter": metric.parameter,
    })
}

fn failed_body(reason: &str, scanned: &[(f64, f64)]) -> Value {
    json!({ "reason": reason, "scanned": scanned })
}

/// Evaluation times for a decay curve on `[0, 10 t0]`.
fn decay_times(kind: SemigroupKind, t0: f64) -> Vec<f64> {
    match kind {
        SemigroupKind::Continuous => (0..=200).map(|i| i as f64 * t0 / 20.0).collect(),
        SemigroupKind::Discrete => {
            let last = ((10.0 * t0).round() as u64).clamp(1, 200);
            (0..=last).map(|n| n as f64).collect()
        }
    }
}

/// Evaluation times for a mean-decay curve on `[t0, 20 t0]`.
fn mean_times(kind: SemigroupKind, t0: f64) -> Vec<f64> {
    match kind {
        SemigroupKind::Continuous => (0..200)
            .map(|i| t0 + i as f64 * (19.0 * t0) / 199.0)
            .collect(),
        SemigroupKind::Discrete => {
            let start = t0.round() as u64;
            let last = ((20.0 * t0).round() as u64).clamp(start, start + 199);
            (start..=last).map(|n| n as f64).collect()
        }
    }
}

struct DeltaAnalysis;

impl Analysis for DeltaAnalysis {
    fn name(&self) -> &'static str {
        "delta"
    }

    fn description(&self) -> &'static str {
        "contraction coefficient of the semigroup at one time, relative to the projection"
    }

    fn required_params(&self) -> &'static [&'static str] {
        &[]
    }

    fn optional_params(&self) -> &'static [&'static str] {
        &["t0"]
    }

    fn run(&self, scenario: &Scenario, ctx: &RunContext) -> Result<AnalysisOutput, CliError> {
        let t0 = scenario.params.t0.unwrap_or(1.0);
        let op = scenario.semigroup.evaluate(t0)?;
        let opts = DeltaOptions::default();
        let result = delta_auto(op.matrix(), &scenario.projection, &opts)?;
        let witness: Option<Vec<f64>> = result
            .witness
            .as_ref()
            .map(|w| w.coords().iter().copied().collect());
        let mut body = json!({
            "t0": t0,
            "value": result.value(),
            "lower": result.lower,
            "upper": result.upper,
            "method": method_label(result.method),
            "witness": witness,
        });
        if ctx.oracle {
            let check = match scenario.space {
                StateSpace::Classical { .. } => {
                    let oracle =
                        delta_vertex_enum(op.matrix(), scenario.projection.matrix(), &opts)?;
                    let agreement = (oracle.value() - result.value()).abs() <= 1e-9;
                    json!({
                        "method": "vertex-enum",
                        "value": oracle.value(),
                        "agreement": agreement,
                    })
                }
                StateSpace::Qubit => {
                    let oracle = delta_bracket(op.matrix(), &scenario.projection, &opts)?;
                    let agreement = result.value() + 1e-9 >= oracle.lower
                        && result.value() <= oracle.upper + 1e-9;
                    json!({
                        "method": "bracket",
                        "lower": oracle.lower,
                        "upper": oracle.upper,
                        "agreement": agreement,
                    })
                }
            };
            body["oracle_check"] = check;
        }
        Ok(AnalysisOutput {
            body,
            curve: None,
            certified: true,
        })
    }
}

struct CertifyAnalysis;

impl Analysis for CertifyAnalysis {
    fn name(&self) -> &'static str {
        "certify"
    }

    fn description(&self) -> &'static str {
        "certify uniform ergodicity with an exponential decay envelope and a curve"
    }

    fn required_params(&self) -> &'static [&'static str] {
        &[]
    }

    fn optional_params(&self) -> &'static [&'static str] {
        &["t_grid"]
    }

    fn run(&self, scenario: &Scenario, _ctx: &RunContext) -> Result<AnalysisOutput, CliError> {
        let opts = DeltaOptions::default();
        let outcome = certify_uniform(
            &scenario.semigroup,
            &scenario.projection,
            scenario.params.t_grid.as_deref(),
            auto_strategy(),
            &opts,
        )?;
        match outcome {
            CertifyOutcome::Certified(cert) => {
                let mut rows = Vec::new();
                for t in decay_times(scenario.semigroup.kind(), cert.t0) {
                    let tt = scenario.semigroup.evaluate(t)?;
                    let measured = induced_norm(
                        scenario.space,
                        &(tt.matrix() - scenario.projection.matrix()),
                    )?;
                    let envelope = decay_envelope(&cert, t)?;
                    rows.push(vec![fmt_float(t), fmt_float(measured), fmt_float(envelope)]);
                }
                Ok(AnalysisOutput {
                    body: json!({ "certificate": certificate_json(&cert) }),
                    curve: Some(CurveData::Table {
                        header: vec![
                            "t".to_string(),
                            "measured_norm".to_string(),
                            "envelope_bound".to_string(),
                        ],
                        rows,
                    }),
                    certified: true,
                })
            }
            CertifyOutcome::Failed { reason, scanned } => Ok(AnalysisOutput {
                body: failed_body(&reason, &scanned),
                curve: None,
                certified: false,
            }),
        }
    }
}

struct MeanAnalysis;

impl Analysis for MeanAnalysis {
    fn name(&self) -> &'static str {
        "mean"
    }

    fn description(&self) -> &'static str {
        "certify uniform mean ergodicity with a 1/t envelope on the Cesaro averages"
    }

    fn required_params(&self) -> &'static [&'static str] {
        &[]
    }

    fn optional_params(&self) -> &'static [&'static str] {
        &["t_grid"]
    }

    fn run(&self, scenario: &Scenario, _ctx: &RunContext) -> Result<AnalysisOutput, CliError> {
        let opts = DeltaOptions::default();
        let outcome = certify_mean(
            &scenario.semigroup,
            &scenario.projection,
            scenario.params.t_grid.as_deref(),
            auto_strategy(),
            &opts,
        )?;
        match outcome {
            CertifyOutcome::Certified(cert) => {
                let mut rows = Vec::new();
                for t in mean_times(scenario.semigroup.kind(), cert.t0) {
                    let avg = scenario.semigroup.cesaro(t)?;
                    let measured = induced_norm(
                        scenario.space,
                        &(avg.matrix() - scenario.projection.matrix()),
                    )?;
                    let bound = ume_bound(&cert, t)?;
                    rows.push(vec![fmt_float(t), fmt_float(measured), fmt_float(bound)]);
                }
                Ok(AnalysisOutput {
                    body: json!({ "certificate": certificate_json(&cert) }),
                    curve: Some(CurveData::Table {
                        header: vec![
                            "t".to_string(),
                            "measured_norm".to_string(),
                            "envelope_bound".to_string(),
                        ],
                        rows,
                    }),
                    certified: true,
                })
            }
            CertifyOutcome::Failed { reason, scanned } => Ok(AnalysisOutput {
                body: failed_body(&reason, &scanned),
                curve: None,
                certified: false,
            }),
        }
    }
}

struct WeakMeanAnalysis;

impl Analysis for WeakMeanAnalysis {
    fn name(&self) -> &'static str {
        "weak_mean"
    }

    fn description(&self) -> &'static str {
        "check whether a power of one Cesaro average contracts below one"
    }

    fn required_params(&self) -> &'static [&'static str] {
        &["t0", "n0"]
    }

    fn optional_params(&self) -> &'static [&'static str] {
        &[]
    }

    fn run(&self, scenario: &Scenario, _ctx: &RunContext) -> Result<AnalysisOutput, CliError> {
        let t0 = require_f64(scenario.params.t0, "t0", self.name())?;
        let n0 = scenario.params.n0.ok_or_else(|| {
            CliError::Input("the weak_mean analysis requires params.n0".to_string())
        })?;
        let opts = DeltaOptions::default();
        let report = weak_mean_check(
            &scenario.semigroup,
            &scenario.projection,
            t0,
            n0,
            auto_strategy(),
            &opts,
        )?;
        Ok(AnalysisOutput {
            body: json!({
                "t0": report.t0,
                "n0": report.n0,
                "q": report.q,
                "certifies": report.certifies,
                "decay": report.decay,
            }),
            curve: None,
            certified: report.certifies,
        })
    }
}

struct DoeblinAnalysis;

impl Analysis for DoeblinAnalysis {
    fn name(&self) -> &'static str {
        "doeblin"
    }

    fn description(&self) -> &'static str {
        "check the minorization-style mean condition at level tau and horizon t0"
    }

    fn required_params(&self) -> &'static [&'static str] {
        &["tau", "t0"]
    }

    fn optional_params(&self) -> &'static [&'static str] {
        &[]
    }

    fn run(&self, scenario: &Scenario, _ctx: &RunContext) -> Result<AnalysisOutput, CliError> {
        let tau = require_f64(scenario.params.tau, "tau", self.name())?;
        let t0 = require_f64(scenario.params.t0, "t0", self.name())?;
        let report = doeblin_check(
            &scenario.semigroup,
            &scenario.projection,
            &scenario.projection,
            tau,
            t0,
        )?;
        Ok(AnalysisOutput {
            body: json!({
                "holds": report.holds,
                "max_phi_norm": report.max_phi_norm,
                "implied_delta": report.implied_delta,
                "delta_direct": report.delta_direct,
                "exact_sup": report.exact_sup,
                "tau": report.tau,
                "t0": report.t0,
            }),
            curve: None,
            certified: report.holds,
        })
    }
}

struct ErgodizeAnalysis;

impl Analysis for ErgodizeAnalysis {
    fn name(&self) -> &'static str {
        "ergodize"
    }

    fn description(&self) -> &'static str {
        "build an epsilon-close uniformly ergodic perturbation of an invariant pair"
    }

    fn required_params(&self) -> &'static [&'static str] {
        &["epsilon"]
    }

    fn optional_params(&self) -> &'static [&'static str] {
        &[]
    }

    fn run(&self, scenario: &Scenario, _ctx: &RunContext) -> Result<AnalysisOutput, CliError> {
        let epsilon = require_f64(scenario.params.epsilon, "epsilon", self.name())?;
        let result = ergodize(&scenario.semigroup, &scenario.projection, epsilon)?;
        Ok(AnalysisOutput {
            body: json!({
                "epsilon": epsilon,
                "lambda": result.lambda,
                "closeness": metric_json(&result.closeness),
                "certificate": certificate_json(&result.certificate),
            }),
            curve: None,
            certified: true,
        })
    }
}

struct RhoAnalysis;

impl Analysis for RhoAnalysis {
    fn name(&self) -> &'static str {
        "rho"
    }

    fn description(&self) -> &'static str {
        "certified distance between a perturbation's base and perturbed semigroups"
    }

    fn required_params(&self) -> &'static [&'static str] {
        &["r"]
    }

    fn optional_params(&self) -> &'static [&'static str] {
        &["tol"]
    }

    fn run(&self, scenario: &Scenario, _ctx: &RunContext) -> Result<AnalysisOutput, CliError> {
        let r = require_f64(scenario.params.r, "r", self.name())?;
        let base = scenario.base.as_ref().ok_or_else(|| {
            CliError::Input(
                "the rho analysis needs semigroup.perturbation so there are two semigroups to compare"
                    .to_string(),
            )
        })?;
        let tol = scenario.params.tol.unwrap_or(1e-3);
        let metric = rho_r(base, &scenario.semigroup, r, tol)?;
        Ok(AnalysisOutput {
            body: json!({
                "r": r,
                "tol": tol,
                "metric": metric_json(&metric),
            }),
            curve: None,
            certified: true,
        })
    }
}

struct SpectralAnalysis;

impl Analysis for SpectralAnalysis {
    fn name(&self) -> &'static str {
        "spectral"
    }

    fn description(&self) -> &'static str {
        "contraction roots along the step grid against the spectral radius"
    }

    fn required_params(&self) -> &'static [&'static str] {
        &[]
    }

    fn optional_params(&self) -> &'static [&'static str] {
        &["n0", "t_grid"]
    }

    fn run(&self, scenario: &Scenario, _ctx: &RunContext) -> Result<AnalysisOutput, CliError> {
        let steps = scenario.params.n0.unwrap_or(50) as usize;
        let opts = DeltaOptions::default();
        let outcome = certify_uniform(
            &scenario.semigroup,
            &scenario.projection,
            scenario.params.t_grid.as_deref(),
            auto_strategy(),
            &opts,
        )?;
        match outcome {
            CertifyOutcome::Certified(cert) => {
                let report =
                    spectral_check(&scenario.semigroup, &scenario.projection, steps, &cert)?;
                Ok(AnalysisOutput {
                    body: json!({
                        "certificate": certificate_json(&cert),
                        "delta_roots": report.delta_roots,
                        "spectral_radius": report.spectral_radius,
                        "gap": report.gap,
                        "exp_fit": report.exp_fit,
                        "radius_match": report.radius_match,
                    }),
                    curve: None,
                    certified: true,
                })
            }
            CertifyOutcome::Failed { reason, scanned } => Ok(AnalysisOutput {
                body: failed_body(&reason, &scanned),
                curve: None,
                certified: false,
            }),
        }
    }
}

struct QubitExampleAnalysis;

impl Analysis for QubitExampleAnalysis {
    fn name(&self) -> &'static str {
        "qubit_example"
    }

    fn description(&self) -> &'static str {
        "closed-form table for the canonical qubit channel and its projection"
    }

    fn required_params(&self) -> &'static [&'static str] {
        &[]
    }

    fn optional_params(&self) -> &'static [&'static str] {
        &["n_max", "tau"]
    }

    fn run(&self, scenario: &Scenario, _ctx: &RunContext) -> Result<AnalysisOutput, CliError> {
        if scenario.space != StateSpace::Qubit {
            return Err(CliError::Input(
                "the qubit_example analysis runs on the qubit space".to_string(),
            ));
        }
        let step = scenario.semigroup.evaluate_steps(1)?;
        if max_abs(&(step.matrix() - phi().operator().matrix())) > 1e-12 {
            return Err(CliError::Input(
                "the qubit_example analysis runs the canonical channel; set semigroup.pauli = [-1, 0, 1]"
                    .to_string(),
            ));
        }
        if max_abs(&(scenario.projection.matrix() - projection_p().matrix())) > 1e-12 {
            return Err(CliError::Input(
                "the qubit_example analysis uses the canonical projection; set projection.pauli_p = [0, 0, 1]"
                    .to_string(),
            ));
        }
        let n_max = scenario.params.n_max.unwrap_or(100);
        let taus: Vec<f64> = scenario.params.tau.into_iter().collect();
        let report = example_report(n_max, &taus)?;
        let thresholds: Vec<Value> = report
            .thresholds
            .iter()
            .map(|th| {
                json!({
                    "tau": th.tau,
                    "first_n0": th.first_n0,
                    "sufficient_n0": th.sufficient_n0,
                })
            })
            .collect();
        Ok(AnalysisOutput {
            body: json!({
                "n_max": n_max,
                "taus": report.taus,
                "thresholds": thresholds,
                "rows": report.rows.len(),
            }),
            curve: Some(CurveData::Raw(report.csv())),
            certified: true,
        })
    }
}
