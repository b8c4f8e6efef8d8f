//! Scenario configuration: serde types mirroring the published schema and
//! construction of the core objects they describe.

use crate::error::CliError;
use dobrushin::{
    block_projection, perturb, MarkovOperator, MarkovProjection, PauliChannel, Semigroup,
    StateSpace,
};
use nalgebra::DMatrix;
use serde::Deserialize;

/// One scenario: a state space, a semigroup on it, a Markov projection,
/// the analysis to run, and its parameters.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub space: SpaceConfig,
    pub semigroup: SemigroupConfig,
    pub projection: ProjectionConfig,
    pub analysis: AnalysisName,
    #[serde(default)]
    pub params: Params,
}

/// State-space description: `{"classical": {"n": 5}}` or `"qubit"`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceConfig {
    Classical { n: usize },
    Qubit,
}

/// Semigroup description; matrices are row arrays of decimals.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemigroupConfig {
    /// Continuous semigroup `t -> exp(t A)` from a generator.
    RateMatrix(Vec<Vec<f64>>),
    /// Discrete semigroup `n -> T^n` from a Markov step.
    DiscreteOperator(Vec<Vec<f64>>),
    /// Discrete semigroup of the Pauli-diagonal qubit channel.
    Pauli([f64; 3]),
    /// Exponentially damped mixture of a base semigroup with a Markov kick.
    Perturbation(PerturbationConfig),
}

/// Parameters of a perturbed semigroup.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    pub base: Box<SemigroupConfig>,
    pub q_operator: QOperatorConfig,
    pub lambda: f64,
}

/// Kick operator of a perturbation: a Pauli triple or an explicit matrix.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QOperatorConfig {
    Pauli([f64; 3]),
    Matrix(Vec<Vec<f64>>),
}

/// Projection description: classical blocks with weights, the canonical
/// qubit projection as a Pauli triple, or an explicit idempotent matrix.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ProjectionConfig {
    Blocks(BlockProjectionConfig),
    PauliP(PauliProjectionConfig),
    Matrix(MatrixProjectionConfig),
}

/// Classical lumping projection: blocks partition `0..n` (0-based) and
/// each block carries a probability weight vector of full length `n`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockProjectionConfig {
    pub blocks: Vec<Vec<usize>>,
    pub weights: Vec<Vec<f64>>,
}

/// Qubit projection given by a Pauli-diagonal triple (must be idempotent).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PauliProjectionConfig {
    pub pauli_p: [f64; 3],
}

/// Projection given as an explicit matrix in the space's coordinates.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixProjectionConfig {
    pub matrix: Vec<Vec<f64>>,
}

/// The nine analyses the runner knows how to drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnalysisName {
    Delta,
    Certify,
    Mean,
    WeakMean,
    Doeblin,
    Ergodize,
    Rho,
    Spectral,
    QubitExample,
}

impl AnalysisName {
    /// Stable name used in scenario files, subcommands, and reports.
    pub fn label(&self) -> &'static str {
        match self {
            AnalysisName::Delta => "delta",
            AnalysisName::Certify => "certify",
            AnalysisName::Mean => "mean",
            AnalysisName::WeakMean => "weak_mean",
            AnalysisName::Doeblin => "doeblin",
            AnalysisName::Ergodize => "ergodize",
            AnalysisName::Rho => "rho",
            AnalysisName::Spectral => "spectral",
            AnalysisName::QubitExample => "qubit_example",
        }
    }
}

/// Analysis-specific parameters; which ones are required depends on the
/// analysis (see the catalog printed by `dobrushin list`).
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub t0: Option<f64>,
    pub t_grid: Option<Vec<f64>>,
    pub n0: Option<u64>,
    pub tau: Option<f64>,
    pub epsilon: Option<f64>,
    pub r: Option<f64>,
    pub n_max: Option<u64>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

/// Parse a scenario file, reporting the JSON path and position on failure.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, CliError> {
    let deserializer = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(deserializer).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            CliError::Config(e.inner().to_string())
        } else {
            CliError::Config(format!("at `{path}`: {}", e.inner()))
        }
    })
}

/// A scenario with its core objects built and validated.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub space: StateSpace,
    pub semigroup: Semigroup,
    /// The unperturbed base, present when the semigroup is a perturbation.
    pub base: Option<Semigroup>,
    pub projection: MarkovProjection,
    pub analysis: AnalysisName,
    pub params: Params,
}

/// Build and validate the core objects described by a parsed config.
pub fn build_scenario(config: &ScenarioConfig, tol: f64) -> Result<Scenario, CliError> {
    let space = match config.space {
        SpaceConfig::Classical { n } => StateSpace::classical(n)?,
        SpaceConfig::Qubit => StateSpace::Qubit,
    };
    let (semigroup, base) = build_semigroup(space, &config.semigroup, tol)?;
    let projection = build_projection(space, &config.projection, tol)?;
    Ok(Scenario {
        space,
        semigroup,
        base,
        projection,
        analysis: config.analysis,
        params: config.params.clone(),
    })
}

fn matrix_from_rows(space: StateSpace, rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>, CliError> {
    let d = space.dim();
    if rows.len() != d {
        return Err(CliError::Input(format!(
            "{what}: expected {d} rows for {}, got {}",
            space.label(),
            rows.len()
        )));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != d {
            return Err(CliError::Input(format!(
                "{what}: row {i} has {} entries, expected {d}",
                row.len()
            )));
        }
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(DMatrix::from_row_slice(d, d, &flat))
}

fn pauli_channel(space: StateSpace, triple: [f64; 3], what: &str) -> Result<PauliChannel, CliError> {
    if space != StateSpace::Qubit {
        return Err(CliError::Input(format!(
            "{what}: Pauli triples are only defined on the qubit space"
        )));
    }
    Ok(PauliChannel::new(triple[0], triple[1], triple[2])?)
}

fn build_semigroup(
    space: StateSpace,
    config: &SemigroupConfig,
    tol: f64,
) -> Result<(Semigroup, Option<Semigroup>), CliError> {
    match config {
        SemigroupConfig::RateMatrix(rows) => {
            let a = matrix_from_rows(space, rows, "semigroup.rate_matrix")?;
            Ok((Semigroup::continuous(space, a, tol)?, None))
        }
        SemigroupConfig::DiscreteOperator(rows) => {
            let m = matrix_from_rows(space, rows, "semigroup.discrete_operator")?;
            let step = MarkovOperator::new(space, m, tol)?;
            Ok((Semigroup::discrete(step), None))
        }
        SemigroupConfig::Pauli(triple) => {
            let channel = pauli_channel(space, *triple, "semigroup.pauli")?;
            Ok((Semigroup::discrete(channel.operator()), None))
        }
        SemigroupConfig::Perturbation(p) => {
            let (base, _) = build_semigroup(space, &p.base, tol)?;
            let q = match &p.q_operator {
                QOperatorConfig::Pauli(triple) => {
                    pauli_channel(space, *triple, "semigroup.perturbation.q_operator")?.operator()
                }
                QOperatorConfig::Matrix(rows) => {
                    let m = matrix_from_rows(space, rows, "semigroup.perturbation.q_operator")?;
                    MarkovOperator::new(space, m, tol)?
                }
            };
            let perturbed = perturb(&base, &q, p.lambda)?;
            Ok((perturbed.semigroup().clone(), Some(base)))
        }
    }
}

fn build_projection(
    space: StateSpace,
    config: &ProjectionConfig,
    tol: f64,
) -> Result<MarkovProjection, CliError> {
    match config {
        ProjectionConfig::Blocks(b) => {
            Ok(block_projection(space, &b.blocks, &b.weights, tol)?)
        }
        ProjectionConfig::PauliP(p) => {
            let channel = pauli_channel(space, p.pauli_p, "projection.pauli_p")?;
            Ok(MarkovProjection::new(channel.operator(), tol)?)
        }
        ProjectionConfig::Matrix(m) => {
            let mat = matrix_from_rows(space, &m.matrix, "projection.matrix")?;
            let op = MarkovOperator::new(space, mat, tol)?;
            Ok(MarkovProjection::new(op, tol)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use dobrushin::DEFAULT_TOL;

    fn parse(text: &str) -> ScenarioConfig {
        parse_config(text).expect("config should parse")
    }

    #[test]
    fn parses_every_space_and_projection_form() {
        let classical = parse(
            r#"{
                "space": {"classical": {"n": 2}},
                "semigroup": {"rate_matrix": [[-1.0, 1.0], [1.0, -1.0]]},
                "projection": {"blocks": [[0, 1]], "weights": [[0.5, 0.5]]},
                "analysis": "certify",
                "params": {"t_grid": [1.0]}
            }"#,
        );
        assert_eq!(classical.analysis.label(), "certify");
        let scenario = build_scenario(&classical, DEFAULT_TOL).unwrap();
        assert_eq!(scenario.space.dim(), 2);
        assert!(scenario.base.is_none());

        let qubit = parse(
            r#"{
                "space": "qubit",
                "semigroup": {"pauli": [-1.0, 0.0, 1.0]},
                "projection": {"pauli_p": [0.0, 0.0, 1.0]},
                "analysis": "qubit_example"
            }"#,
        );
        let scenario = build_scenario(&qubit, DEFAULT_TOL).unwrap();
        assert_eq!(scenario.space, StateSpace::Qubit);

        let explicit = parse(
            r#"{
                "space": {"classical": {"n": 2}},
                "semigroup": {"discrete_operator": [[0.5, 0.5], [0.5, 0.5]]},
                "projection": {"matrix": [[0.5, 0.5], [0.5, 0.5]]},
                "analysis": "delta"
            }"#,
        );
        let scenario = build_scenario(&explicit, DEFAULT_TOL).unwrap();
        assert_eq!(scenario.projection.matrix()[(0, 0)], 0.5);
    }

    #[test]
    fn perturbation_config_keeps_the_base() {
        let config = parse(
            r#"{
                "space": {"classical": {"n": 2}},
                "semigroup": {"perturbation": {
                    "base": {"rate_matrix": [[-1.0, 1.0], [1.0, -1.0]]},
                    "q_operator": {"matrix": [[0.5, 0.5], [0.5, 0.5]]},
                    "lambda": 0.25
                }},
                "projection": {"blocks": [[0, 1]], "weights": [[0.5, 0.5]]},
                "analysis": "rho",
                "params": {"r": 1.0}
            }"#,
        );
        let scenario = build_scenario(&config, DEFAULT_TOL).unwrap();
        assert!(scenario.base.is_some());
        assert_eq!(scenario.params.r, Some(1.0));
    }

    #[test]
    fn parse_errors_carry_the_field_path() {
        let err = parse_config(
            r#"{
                "space": {"classical": {"n": 2}},
                "semigroup": {"rate_matrix": [[-1.0, 1.0], [1.0, "x"]]},
                "projection": {"blocks": [[0, 1]], "weights": [[0.5, 0.5]]},
                "analysis": "delta"
            }"#,
        )
        .unwrap_err();
        let message = err.to_string();
        assert!(message.contains("rate_matrix"), "got: {message}");

        let err = parse_config(r#"{"space": "qubit"}"#).unwrap_err();
        assert!(err.to_string().contains("semigroup"), "got: {err}");

        let err = parse_config(
            r#"{
                "space": {"classical": {"n": 2}},
                "semigroup": {"rate_matrix": [[-1.0, 1.0], [1.0, -1.0]]},
                "projection": {"blocks": [[0, 1]], "weights": [[0.5, 0.5]]},
                "analysis": "delta",
                "params": {"bogus": 1}
            }"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("bogus"), "got: {err}");
    }

    #[test]
    fn dimension_guards_reject_mismatched_rows() {
        let config = parse(
            r#"{
                "space": {"classical": {"n": 3}},
                "semigroup": {"rate_matrix": [[-1.0, 1.0], [1.0, -1.0]]},
                "projection": {"blocks": [[0, 1, 2]], "weights": [[0.4, 0.3, 0.3]]},
                "analysis": "delta"
            }"#,
        );
        let err = build_scenario(&config, DEFAULT_TOL).unwrap_err();
        assert!(matches!(err, CliError::Input(_)), "got: {err}");
        assert!(err.to_string().contains("expected 3 rows"), "got: {err}");
    }

    #[test]
    fn pauli_forms_require_the_qubit_space() {
        let config = parse(
            r#"{
                "space": {"classical": {"n": 4}},
                "semigroup": {"pauli": [-1.0, 0.0, 1.0]},
                "projection": {"blocks": [[0, 1, 2, 3]], "weights": [[0.25, 0.25, 0.25, 0.25]]},
                "analysis": "delta"
            }"#,
        );
        let err = build_scenario(&config, DEFAULT_TOL).unwrap_err();
        assert!(err.to_string().contains("qubit"), "got: {err}");
    }
}
