//! Ergodicity analysis for finite-dimensional Markov operators and semigroups.
//!
//! The library computes generalized Dobrushin contraction coefficients of
//! linear operators relative to a Markov projection, certifies uniform and
//! mean ergodicity with explicit decay envelopes, checks Doeblin-type mean
//! conditions, and constructs ergodizing perturbations of Markov semigroups
//! with verified closeness in the semigroup metric.
//!
//! Two concrete state spaces are supported: classical `n`-state probability
//! vectors under the l1 norm, and single-qubit Hermitian matrices in Bloch
//! coordinates under the trace norm.

pub mod delta;
pub mod ergodicity;
pub mod error;
pub mod linalg;
pub mod markov;
pub mod perturbation;
pub mod qubit;
pub mod sampling;
pub mod semigroup;
pub mod space;

pub use delta::{
    delta_auto, delta_bracket, delta_exact, delta_pair_formula, delta_strategies, delta_strategy,
    delta_vertex_enum, induced_norm, DeltaMethod, DeltaOptions, DeltaResult, DeltaStrategy,
};
pub use ergodicity::{
    certify_mean, certify_uniform, decay_envelope, default_grid, doeblin_check, spectral_check,
    ume_bound, weak_mean_check, Certificate, CertifyOutcome, DoeblinReport, Mode, SpectralReport,
    WeakMeanReport,
};
pub use error::Error;
pub use markov::{
    block_projection, projection_relations, validate_markov, BlockStructure, MarkovOperator,
    MarkovProjection, RelationReport,
};
pub use perturbation::{
    dyson_eval, dyson_terms, ergodize, openness_radius, perturb, rho_full, rho_r, DysonResult,
    ErgodizeResult, MetricValue, OpennessResult, PerturbedSemigroup,
};
pub use qubit::{
    cesaro_phi, diagonal_delta_p, diagonal_induced_norm, doeblin_phi0_holds, example_report, phi,
    phi_power, projection_p, PauliChannel, QubitExampleReport, QubitExampleRow, TauThreshold,
};
pub use semigroup::{validate_generator, Semigroup, SemigroupKind};
pub use space::{Element, StateSpace};

/// Default tolerance for structural validation (positivity, idempotence,
/// stochasticity, commutation).
pub const DEFAULT_TOL: f64 = 1e-9;

/// Margin by which a contraction coefficient must stay below one before a
/// certificate is issued.
pub const CERTIFICATION_MARGIN: f64 = 1e-6;
