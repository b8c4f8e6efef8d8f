//! Certification of uniform and mean ergodicity with explicit decay
//! envelopes, spectral-radius diagnostics, and the Doeblin-type mean
//! condition.
//!
//! A certificate records a time `t0` and the contraction value
//! `q = delta_P(T_{t0}) < 1` found on a scan grid, together with envelope
//! constants derived from submultiplicativity: `||T_t - P|| <= C e^{-alpha t}`
//! with `C = 2/q` and `alpha = ln(1/q)/t0`. Mean certificates bound
//! `||A_t - Q|| <= (2 t0 / (1 - q)) / t` for `t >= t0`, where `A_t` is the
//! Cesaro average. Every certificate is checked against the measured decay
//! curve before it is issued; a violation downgrades the result to a
//! failure rather than shipping an unsound envelope.

use crate::delta::{delta_auto, induced_norm, max_over_pure_states, DeltaOptions, DeltaStrategy};
use crate::error::{Error, Result};
use crate::linalg::{matrix_power, spectral_radius};
use crate::markov::{projection_relations, MarkovProjection};
use crate::semigroup::{Semigroup, SemigroupKind};
use crate::space::StateSpace;
use crate::CERTIFICATION_MARGIN;
use nalgebra::DMatrix;

/// Which statement a certificate witnesses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// `||T_t - P|| -> 0` exponentially fast.
    Uniform,
    /// `||A_t - Q|| -> 0` at rate `O(1/t)`.
    UniformMean,
    /// `delta_P` of a power of one Cesaro average is below 1.
    WeakMean,
    /// The minorization-style mean condition with compensator budget `tau/4`.
    Doeblin,
}

impl Mode {
    /// Stable lowercase name used in serialized reports.
    pub fn label(&self) -> &'static str {
        match self {
            Mode::Uniform => "uniform",
            Mode::UniformMean => "uniform-mean",
            Mode::WeakMean => "weak-mean",
            Mode::Doeblin => "doeblin",
        }
    }
}

/// An ergodicity certificate: the certified contraction together with the
/// envelope constants it implies and the decay curve measured on the scan
/// grid.
#[derive(Debug, Clone)]
pub struct Certificate {
    /// Statement witnessed by this certificate.
    pub mode: Mode,
    /// First grid time whose contraction value certifies.
    pub t0: f64,
    /// Certified contraction value at `t0`.
    pub q: f64,
    /// Envelope prefactor: `2/q` (uniform) or `2 t0/(1-q)` (mean).
    pub c: f64,
    /// Exponential rate `ln(1/q)/t0`; unused (0) for mean certificates.
    pub alpha: f64,
    /// Minorization level, present only for Doeblin-mode certificates.
    pub tau: Option<f64>,
    /// Power index, present only for weak-mean certificates.
    pub n0: Option<u64>,
    /// Largest compensator norm, present only for Doeblin-mode certificates.
    pub max_phi_norm: Option<f64>,
    /// Description of the projection the statement is relative to.
    pub projection: String,
    /// The scan grid.
    pub grid: Vec<f64>,
    /// Measured `(t, ||T_t - P||)` (or `||A_t - Q||`) pairs over the grid.
    pub measured_curve: Vec<(f64, f64)>,
}

/// Result of a certification scan: either a verified certificate or the
/// reason none was issued together with the scanned values.
#[derive(Debug, Clone)]
pub enum CertifyOutcome {
    /// A certificate was issued and verified against the measured curve.
    Certified(Certificate),
    /// No certificate; `scanned` holds the `(t, q)` pairs examined.
    Failed {
        /// Why certification did not go through.
        reason: String,
        /// Contraction values examined before giving up.
        scanned: Vec<(f64, f64)>,
    },
}

impl CertifyOutcome {
    /// The certificate, when one was issued.
    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            CertifyOutcome::Certified(cert) => Some(cert),
            CertifyOutcome::Failed { .. } => None,
        }
    }

    /// Whether a certificate was issued.
    pub fn is_certified(&self) -> bool {
        matches!(self, CertifyOutcome::Certified(_))
    }
}

/// Spectral diagnostics relating the contraction roots to the spectral
/// radius of `T_1 - P`.
#[derive(Debug, Clone)]
pub struct SpectralReport {
    /// `delta_P(T_n)^{1/n}` for `n = 1..=n_max`.
    pub delta_roots: Vec<f64>,
    /// Spectral radius of `T_1 - P` by eigenvalue moduli.
    pub spectral_radius: f64,
    /// `|delta_P(T_{n_max})^{1/n_max} - r(T_1 - P)|`.
    pub gap: f64,
    /// Whether `delta_P(T_n) = delta_P(T_1)^n` within 1e-8 on the fit grid.
    pub exp_fit: bool,
    /// Whether `delta_P(T_n) = r(T_n - P)` within 1e-8 on the fit grid.
    pub radius_match: bool,
}

/// Result of the weak-mean check on one `(t0, n0)` pair.
#[derive(Debug, Clone)]
pub struct WeakMeanReport {
    /// Averaging horizon.
    pub t0: f64,
    /// Power applied to the Cesaro average.
    pub n0: u64,
    /// `delta_P(A_{t0}^{n0})`.
    pub q: f64,
    /// Whether `q < 1` strictly.
    pub certifies: bool,
    /// Observed `(t, delta_P(A_t))` on a growing grid when certified.
    pub decay: Vec<(f64, f64)>,
}

/// Result of the Doeblin-type mean condition check.
#[derive(Debug, Clone)]
pub struct DoeblinReport {
    /// Whether the compensator budget `tau/4` is respected.
    pub holds: bool,
    /// Largest compensator norm over the state base.
    pub max_phi_norm: f64,
    /// `1 - tau/2`, reported when the condition holds.
    pub implied_delta: Option<f64>,
    /// Directly computed `delta_P(A_{t0})` for cross-checking.
    pub delta_direct: f64,
    /// Whether the supremum was computed exactly (classical) or located by
    /// a stabilized sphere scan (qubit).
    pub exact_sup: bool,
    /// Minorization level checked.
    pub tau: f64,
    /// Averaging horizon checked.
    pub t0: f64,
}

/// Default scan grid: geometric `2^k` for `k = -3..=6` (continuous) or
/// `1..=64` (discrete). Contraction values are nonincreasing along the
/// semigroup when the projection commutes, so a geometric scan finds a
/// certifying time whenever one exists below the cap.
pub fn default_grid(kind: SemigroupKind) -> Vec<f64> {
    match kind {
        SemigroupKind::Continuous => (-3..=6).map(|k| 2.0_f64.powi(k)).collect(),
        SemigroupKind::Discrete => (1..=64).map(|n| n as f64).collect(),
    }
}

fn resolve_grid(s: &Semigroup, t_grid: Option<&[f64]>) -> Result<Vec<f64>> {
    let grid = match t_grid {
        Some(g) => g.to_vec(),
        None => default_grid(s.kind()),
    };
    if grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "t_grid",
            reason: "scan grid must not be empty".into(),
        });
    }
    Ok(grid)
}

fn scan_summary(scanned: &[(f64, f64)]) -> String {
    let min = scanned
        .iter()
        .map(|&(_, q)| q)
        .fold(f64::INFINITY, f64::min);
    format!(
        "no grid point certifies: smallest contraction value {min:.6} over {} points",
        scanned.len()
    )
}

/// Scan `t_grid` for the first `t0` with `q = delta_P(T_{t0}) <= 1 - 1e-6`
/// and issue a uniform-decay certificate `||T_t - P|| <= min(2, C e^{-alpha t})`
/// with `C = 2/q`, `alpha = ln(1/q)/t0`.
///
/// Preconditions: `T_t P = P T_t = P` on every grid point (invariance and
/// commutation), reported as a `Precondition` error otherwise. When no grid
/// point certifies — or the measured curve violates the envelope, which
/// would make the certificate unsound — the outcome is `Failed`, not an
/// error.
pub fn certify_uniform(
    s: &Semigroup,
    p: &MarkovProjection,
    t_grid: Option<&[f64]>,
    strategy: &dyn DeltaStrategy,
    opts: &DeltaOptions,
) -> Result<CertifyOutcome> {
    if s.space() != p.space() {
        return Err(Error::SpaceMismatch(
            "semigroup and projection on different spaces".into(),
        ));
    }
    let grid = resolve_grid(s, t_grid)?;
    let ops = grid
        .iter()
        .map(|&t| s.evaluate(t))
        .collect::<Result<Vec<_>>>()?;
    for (&t, op) in grid.iter().zip(&ops) {
        let rel = projection_relations(op, p, None, 1e-8)?;
        if !(rel.commute && rel.right_invariant && rel.left_invariant) {
            return Err(Error::Precondition(format!(
                "projection invariance fails at t = {t}: max defect {:.3e}",
                rel.max_defect
            )));
        }
    }
    let mut scanned = Vec::new();
    let mut hit = None;
    for (&t, op) in grid.iter().zip(&ops) {
        let q = strategy.compute(op.matrix(), p, opts)?.value();
        scanned.push((t, q));
        if q <= 1.0 - CERTIFICATION_MARGIN {
            hit = Some((t, q));
            break;
        }
    }
    let Some((t0, q)) = hit else {
        return Ok(CertifyOutcome::Failed {
            reason: scan_summary(&scanned),
            scanned,
        });
    };
    let floor = q.max(1e-300);
    let mut measured_curve = Vec::with_capacity(grid.len());
    for (&t, op) in grid.iter().zip(&ops) {
        measured_curve.push((t, induced_norm(s.space(), &(op.matrix() - p.matrix()))?));
    }
    let cert = Certificate {
        mode: Mode::Uniform,
        t0,
        q,
        c: 2.0 / floor,
        alpha: (1.0 / floor).ln() / t0,
        tau: None,
        n0: None,
        max_phi_norm: None,
        projection: p.description(),
        grid,
        measured_curve,
    };
    for &(t, m) in &cert.measured_curve {
        let envelope = decay_envelope(&cert, t)?;
        if m > envelope + 1e-9 {
            return Ok(CertifyOutcome::Failed {
                reason: format!(
                    "envelope unsound at t = {t}: measured {m:.6e} exceeds {envelope:.6e}"
                ),
                scanned,
            });
        }
    }
    Ok(CertifyOutcome::Certified(cert))
}

/// The decay envelope `min(2, C e^{-alpha t})` implied by a uniform
/// certificate (the trivial bound 2 holds for any pair of Markov maps).
pub fn decay_envelope(cert: &Certificate, t: f64) -> Result<f64> {
    if cert.mode != Mode::Uniform {
        return Err(Error::WrongMode(format!(
            "decay envelopes require a uniform certificate, got {}",
            cert.mode.label()
        )));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidParameter {
            name: "t",
            reason: format!("time must be finite and nonnegative, got {t}"),
        });
    }
    Ok((cert.c * (-cert.alpha * t).exp()).min(2.0))
}

/// Scan `t_grid` for the first `t0` with `q = delta_Q(A_{t0}) <= 1 - 1e-6`
/// and issue a mean-decay certificate `||A_t - Q|| <= (2 t0/(1-q))/t` for
/// `t >= t0`.
///
/// Precondition: `A_t Q = Q A_t` on every grid point. A measured violation
/// of the issued bound downgrades the outcome to `Failed`.
pub fn certify_mean(
    s: &Semigroup,
    q_proj: &MarkovProjection,
    t_grid: Option<&[f64]>,
    strategy: &dyn DeltaStrategy,
    opts: &DeltaOptions,
) -> Result<CertifyOutcome> {
    if s.space() != q_proj.space() {
        return Err(Error::SpaceMismatch(
            "semigroup and projection on different spaces".into(),
        ));
    }
    let grid = resolve_grid(s, t_grid)?;
    let averages = grid
        .iter()
        .map(|&t| s.cesaro(t))
        .collect::<Result<Vec<_>>>()?;
    for (&t, avg) in grid.iter().zip(&averages) {
        let rel = projection_relations(avg, q_proj, None, 1e-8)?;
        if !rel.commute {
            return Err(Error::Precondition(format!(
                "Cesaro average fails to commute with the projection at t = {t}: \
                 max defect {:.3e}",
                rel.max_defect
            )));
        }
    }
    let mut scanned = Vec::new();
    let mut hit = None;
    for (&t, avg) in grid.iter().zip(&averages) {
        let q = strategy.compute(avg.matrix(), q_proj, opts)?.value();
        scanned.push((t, q));
        if q <= 1.0 - CERTIFICATION_MARGIN {
            hit = Some((t, q));
            break;
        }
    }
    let Some((t0, q)) = hit else {
        return Ok(CertifyOutcome::Failed {
            reason: scan_summary(&scanned),
            scanned,
        });
    };
    let mut measured_curve = Vec::with_capacity(grid.len());
    for (&t, avg) in grid.iter().zip(&averages) {
        measured_curve.push((
            t,
            induced_norm(s.space(), &(avg.matrix() - q_proj.matrix()))?,
        ));
    }
    let cert = Certificate {
        mode: Mode::UniformMean,
        t0,
        q,
        c: 2.0 * t0 / (1.0 - q),
        alpha: 0.0,
        tau: None,
        n0: None,
        max_phi_norm: None,
        projection: q_proj.description(),
        grid,
        measured_curve,
    };
    for &(t, m) in &cert.measured_curve {
        if t < cert.t0 {
            continue;
        }
        let bound = ume_bound(&cert, t)?;
        if m > bound + 1e-9 {
            return Ok(CertifyOutcome::Failed {
                reason: format!(
                    "mean bound unsound at t = {t}: measured {m:.6e} exceeds {bound:.6e}"
                ),
                scanned,
            });
        }
    }
    Ok(CertifyOutcome::Certified(cert))
}

/// The mean-decay bound `C/t` implied by a mean certificate, valid for
/// `t >= t0`.
pub fn ume_bound(cert: &Certificate, t: f64) -> Result<f64> {
    if cert.mode != Mode::UniformMean {
        return Err(Error::WrongMode(format!(
            "mean bounds require a uniform-mean certificate, got {}",
            cert.mode.label()
        )));
    }
    if !t.is_finite() || t < cert.t0 {
        return Err(Error::InvalidParameter {
            name: "t",
            reason: format!("bound holds for t >= t0 = {}, got {t}", cert.t0),
        });
    }
    Ok(cert.c / t)
}

/// Compute `q = delta_P(A_{t0}^{n0})` and report whether it certifies
/// (`q < 1` strictly). When it does, the observed decay of `delta_P(A_t)`
/// over a doubling grid starting at `t0` is reported alongside.
pub fn weak_mean_check(
    s: &Semigroup,
    p: &MarkovProjection,
    t0: f64,
    n0: u64,
    strategy: &dyn DeltaStrategy,
    opts: &DeltaOptions,
) -> Result<WeakMeanReport> {
    if s.space() != p.space() {
        return Err(Error::SpaceMismatch(
            "semigroup and projection on different spaces".into(),
        ));
    }
    if n0 == 0 {
        return Err(Error::InvalidParameter {
            name: "n0",
            reason: "power index must be at least 1".into(),
        });
    }
    let avg = s.cesaro(t0)?;
    let powered = matrix_power(avg.matrix(), n0);
    let q = strategy.compute(&powered, p, opts)?.value();
    let certifies = q < 1.0;
    let mut decay = Vec::new();
    if certifies {
        for factor in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
            let t = t0 * factor;
            let a_t = s.cesaro(t)?;
            decay.push((t, strategy.compute(a_t.matrix(), p, opts)?.value()));
        }
    }
    Ok(WeakMeanReport {
        t0,
        n0,
        q,
        certifies,
        decay,
    })
}

/// Check the Doeblin-type mean condition at level `tau` and horizon `t0`:
/// with the pointwise-minimal compensator `phi_x = (tau Q x - A_{t0} x)_+`,
/// the condition holds iff `sup_x ||phi_x|| <= tau/4` over the state base.
///
/// The minimal compensator makes the check exact: any admissible
/// compensator dominates it. Classical spaces maximize over simplex
/// vertices (the norm is convex, so this is the exact supremum); the qubit
/// supremum over pure states is located by a deterministic sphere scan and
/// flagged as heuristic. When the condition holds, the implied contraction
/// bound `delta_P(A_{t0}) <= 1 - tau/2` is reported next to the directly
/// computed value.
pub fn doeblin_check(
    s: &Semigroup,
    p: &MarkovProjection,
    q_proj: &MarkovProjection,
    tau: f64,
    t0: f64,
) -> Result<DoeblinReport> {
    if s.space() != p.space() || s.space() != q_proj.space() {
        return Err(Error::SpaceMismatch(
            "semigroup and projections on different spaces".into(),
        ));
    }
    if !tau.is_finite() || tau <= 0.0 || tau > 1.0 {
        return Err(Error::InvalidParameter {
            name: "tau",
            reason: format!("need 0 < tau <= 1, got {tau}"),
        });
    }
    let rel = projection_relations(p.operator(), p, Some(q_proj), 1e-8)?;
    if rel.q_under_p != Some(true) {
        return Err(Error::Precondition(
            "Q is not dominated by P (Q = QP = PQ fails)".into(),
        ));
    }
    let avg = s.cesaro(t0)?;
    let diff = tau * q_proj.matrix() - avg.matrix();
    let (max_phi_norm, exact_sup) = match s.space() {
        StateSpace::Classical { n } => {
            let mut worst = 0.0_f64;
            for i in 0..n {
                let col_positive: f64 = (0..n).map(|j| diff[(j, i)].max(0.0)).sum();
                worst = worst.max(col_positive);
            }
            (worst, true)
        }
        StateSpace::Qubit => {
            let sup = max_over_pure_states(|x| {
                let y = &diff * x;
                let radius = (y[1] * y[1] + y[2] * y[2] + y[3] * y[3]).sqrt();
                (y[0] + radius).max(0.0) + (y[0] - radius).max(0.0)
            });
            (sup.max(0.0), false)
        }
    };
    let holds = max_phi_norm <= tau / 4.0 + 1e-12;
    let delta_direct = delta_auto(avg.matrix(), p, &DeltaOptions::default())?.value();
    Ok(DoeblinReport {
        holds,
        max_phi_norm,
        implied_delta: holds.then_some(1.0 - tau / 2.0),
        delta_direct,
        exact_sup,
        tau,
        t0,
    })
}

/// Relate the contraction roots `delta_P(T_n)^{1/n}` to the spectral radius
/// of `T_1 - P`, and test whether the decay is a pure exponential.
///
/// Requires a uniform certificate (the limit statement presumes uniform
/// ergodicity) and a classical block projection so the contraction values
/// are exact. The roots are computed by iterating `T_1` on the block pair
/// differences directly — products of the values, never powers of tiny
/// numbers — so they stay accurate far into the regime where
/// `delta_P(T_n)` underflows any fixed tolerance. `exp_fit` checks
/// `delta_P(T_n) = delta_P(T_1)^n` and `radius_match` checks
/// `delta_P(T_n) = r(T_n - P)`, both within 1e-8 over `n = 1..=min(10, n_max)`;
/// the two agree on every instance in the test suite, matching the
/// equivalence they encode.
pub fn spectral_check(
    s: &Semigroup,
    p: &MarkovProjection,
    n_max: usize,
    cert: &Certificate,
) -> Result<SpectralReport> {
    if cert.mode != Mode::Uniform {
        return Err(Error::WrongMode(format!(
            "spectral diagnostics require a uniform certificate, got {}",
            cert.mode.label()
        )));
    }
    if s.space() != p.space() {
        return Err(Error::SpaceMismatch(
            "semigroup and projection on different spaces".into(),
        ));
    }
    if n_max == 0 {
        return Err(Error::InvalidParameter {
            name: "n_max",
            reason: "need at least one step".into(),
        });
    }
    let n = match s.space() {
        StateSpace::Classical { n } => n,
        StateSpace::Qubit => {
            return Err(Error::UnsupportedSpace(
                "spectral diagnostics use exact classical block contraction values".into(),
            ))
        }
    };
    let Some(blocks) = p.block_structure() else {
        return Err(Error::Precondition(
            "spectral diagnostics need a classical block projection".into(),
        ));
    };
    let mut pair_columns = Vec::new();
    for block in &blocks.blocks {
        for a in 0..block.len() {
            for b in (a + 1)..block.len() {
                let mut col = vec![0.0; n];
                col[block[a]] = 1.0;
                col[block[b]] = -1.0;
                pair_columns.push(col);
            }
        }
    }
    if pair_columns.is_empty() {
        return Err(Error::Precondition(
            "projection has trivial kernel: no block holds two states".into(),
        ));
    }
    let t1 = s.evaluate(1.0)?;
    let complement = DMatrix::<f64>::identity(n, n) - p.matrix();
    let mut pairs = DMatrix::<f64>::from_fn(n, pair_columns.len(), |i, j| pair_columns[j][i]);
    let mut deltas = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        // Re-project onto ker P after each step: rounding injects a tiny
        // component along the non-decaying range of P, which would
        // otherwise persist under iteration and floor the decay near
        // machine epsilon.
        pairs = &complement * (t1.matrix() * pairs);
        let mut value = 0.0_f64;
        for j in 0..pairs.ncols() {
            value = value.max(pairs.column(j).iter().map(|v| v.abs()).sum::<f64>() / 2.0);
        }
        deltas.push(value);
    }
    let delta_roots: Vec<f64> = deltas
        .iter()
        .enumerate()
        .map(|(idx, &d)| {
            if d <= 0.0 {
                0.0
            } else {
                (d.ln() / (idx + 1) as f64).exp()
            }
        })
        .collect();
    let radius = spectral_radius(&(t1.matrix() - p.matrix()));
    let gap = (delta_roots[n_max - 1] - radius).abs();
    let mut exp_fit = true;
    let mut radius_match = true;
    for k in 1..=n_max.min(10) {
        let delta_k = deltas[k - 1];
        if (delta_k - deltas[0].powi(k as i32)).abs() > 1e-8 {
            exp_fit = false;
        }
        let t_k = matrix_power(t1.matrix(), k as u64);
        if (delta_k - spectral_radius(&(t_k - p.matrix()))).abs() > 1e-8 {
            radius_match = false;
        }
    }
    Ok(SpectralReport {
        delta_roots,
        spectral_radius: radius,
        gap,
        exp_fit,
        radius_match,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delta::delta_strategy;
    use crate::markov::MarkovOperator;
    use crate::sampling::{random_invariant_pair, two_rate_chain};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn auto() -> &'static dyn DeltaStrategy {
        delta_strategy("auto").unwrap()
    }

    fn two_state() -> (Semigroup, MarkovProjection) {
        let space = StateSpace::classical(2).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]);
        let s = Semigroup::continuous(space, a, 1e-12).unwrap();
        let p = MarkovProjection::rank_one(space, &[0.5, 0.5], 1e-12).unwrap();
        (s, p)
    }

    fn pauli_flip() -> (Semigroup, MarkovProjection) {
        let space = StateSpace::qubit();
        let phi = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&[
            1.0, -1.0, 0.0, 1.0,
        ]));
        let s = Semigroup::discrete(MarkovOperator::new(space, phi, 1e-9).unwrap());
        let pm = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&[
            1.0, 0.0, 0.0, 1.0,
        ]));
        let p =
            MarkovProjection::new(MarkovOperator::new(space, pm, 1e-9).unwrap(), 1e-12).unwrap();
        (s, p)
    }

    #[test]
    fn uniform_certificate_two_state() {
        let (s, p) = two_state();
        let opts = DeltaOptions::default();

        // Default geometric grid: the first point already certifies.
        let outcome = certify_uniform(&s, &p, None, auto(), &opts).unwrap();
        let cert = outcome.certificate().expect("certificate");
        assert_eq!(cert.t0, 0.125);
        assert!((cert.q - (-0.25_f64).exp()).abs() <= 1e-12);

        // Unit-time grid reproduces the textbook constants.
        let outcome = certify_uniform(&s, &p, Some(&[1.0]), auto(), &opts).unwrap();
        let cert = outcome.certificate().expect("certificate");
        let q = (-2.0_f64).exp();
        assert_eq!(cert.t0, 1.0);
        assert!((cert.q - q).abs() <= 1e-12);
        assert!((cert.c - 2.0 / q).abs() <= 1e-9);
        assert!((cert.alpha - 2.0).abs() <= 1e-12);

        // The measured decay is exactly e^{-2t}, inside the sandwich
        // delta <= ||T_t - P|| <= 2 delta.
        for &(t, m) in &cert.measured_curve {
            assert!((m - (-2.0 * t).exp()).abs() <= 1e-9);
            let envelope = decay_envelope(cert, t).unwrap();
            assert!(m <= envelope + 1e-9);
        }
    }

    #[test]
    fn decay_envelope_values() {
        let (s, p) = two_state();
        let opts = DeltaOptions::default();
        let outcome = certify_uniform(&s, &p, Some(&[1.0]), auto(), &opts).unwrap();
        let cert = outcome.certificate().unwrap();

        // C = 2e^2 > 2, so the trivial bound wins at t = 0.
        assert_eq!(decay_envelope(cert, 0.0).unwrap(), 2.0);
        let expected = 2.0 * (2.0_f64).exp() * (-20.0_f64).exp();
        assert!((decay_envelope(cert, 10.0).unwrap() - expected).abs() <= 1e-12 * expected);
        assert!(decay_envelope(cert, -1.0).is_err());

        let mean = certify_mean(&s, &p, Some(&[1.0]), auto(), &opts).unwrap();
        let mean_cert = mean.certificate().unwrap();
        assert!(matches!(
            decay_envelope(mean_cert, 1.0),
            Err(Error::WrongMode(_))
        ));
    }

    #[test]
    fn uniform_failure_and_precondition() {
        let opts = DeltaOptions::default();

        // Bit-flip channel: the contraction value is 1 at every power, so
        // certification fails (honestly, not as an error).
        let (s, p) = pauli_flip();
        let outcome = certify_uniform(&s, &p, None, auto(), &opts).unwrap();
        match outcome {
            CertifyOutcome::Failed { ref scanned, .. } => {
                assert_eq!(scanned.len(), 64);
                assert!(scanned.iter().all(|&(_, q)| (q - 1.0).abs() <= 1e-9));
            }
            CertifyOutcome::Certified(_) => panic!("bit-flip channel must not certify"),
        }

        // A projection that is not invariant is a precondition error.
        let (s, _) = two_state();
        let skew =
            MarkovProjection::rank_one(StateSpace::classical(2).unwrap(), &[0.3, 0.7], 1e-12).unwrap();
        assert!(matches!(
            certify_uniform(&s, &skew, None, auto(), &opts),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn uniform_certificate_projection_drift_generator() {
        // Generator lambda (P - I) with lambda = 1: T_t = e^{-t} I + (1 - e^{-t}) P,
        // so the contraction value at t is exactly e^{-t}.
        let space = StateSpace::classical(3).unwrap();
        let p = MarkovProjection::rank_one(space, &[0.2, 0.3, 0.5], 1e-12).unwrap();
        let a = p.matrix() - DMatrix::<f64>::identity(3, 3);
        let s = Semigroup::continuous(space, a, 1e-12).unwrap();
        let outcome =
            certify_uniform(&s, &p, Some(&[1.0]), auto(), &DeltaOptions::default()).unwrap();
        let cert = outcome.certificate().unwrap();
        assert!(cert.q <= (-1.0_f64).exp() + 1e-12);
        assert!((cert.q - (-1.0_f64).exp()).abs() <= 1e-9);
    }

    #[test]
    fn mean_certificate_two_state() {
        let (s, p) = two_state();
        let opts = DeltaOptions::default();

        // Unit-time grid: q = (1 - e^{-2})/2 from the scalar kernel integral.
        let outcome = certify_mean(&s, &p, Some(&[1.0]), auto(), &opts).unwrap();
        let cert = outcome.certificate().unwrap();
        let q = (1.0 - (-2.0_f64).exp()) / 2.0;
        assert_eq!(cert.t0, 1.0);
        assert!((cert.q - q).abs() <= 1e-12);
        assert!((cert.c - 2.0 / (1.0 - q)).abs() <= 1e-12);
        assert!((ume_bound(cert, 10.0).unwrap() - cert.c / 10.0).abs() <= 1e-15);
        assert!(ume_bound(cert, 0.5).is_err());

        // Default grid: the first point t = 1/8 already certifies with the
        // same closed form (1 - e^{-2t})/(2t).
        let outcome = certify_mean(&s, &p, None, auto(), &opts).unwrap();
        let cert = outcome.certificate().unwrap();
        let t0 = 0.125_f64;
        let q = (1.0 - (-2.0 * t0).exp()) / (2.0 * t0);
        assert_eq!(cert.t0, t0);
        assert!((cert.q - q).abs() <= 1e-12);
    }

    #[test]
    fn mean_certificate_discrete_channel_and_identity_failure() {
        let opts = DeltaOptions::default();

        // Bit-flip channel: A_1 = Phi does not certify, A_2 = P does, with
        // contraction value exactly 0 and prefactor 4.
        let (s, p) = pauli_flip();
        let outcome = certify_mean(&s, &p, None, auto(), &opts).unwrap();
        let cert = outcome.certificate().unwrap();
        assert_eq!(cert.t0, 2.0);
        assert!(cert.q.abs() <= 1e-12);
        assert!((cert.c - 4.0).abs() <= 1e-12);
        // Measured curve is chi_odd(n)/n, below 4/n throughout.
        for &(t, m) in &cert.measured_curve {
            let n = t as u64;
            let expected = if n % 2 == 1 { 1.0 / t } else { 0.0 };
            assert!((m - expected).abs() <= 1e-9);
        }

        // The identity semigroup averages to itself; no point certifies.
        let space = StateSpace::classical(2).unwrap();
        let s = Semigroup::discrete(MarkovOperator::identity(space));
        let q = MarkovProjection::rank_one(space, &[0.5, 0.5], 1e-12).unwrap();
        let outcome = certify_mean(&s, &q, None, auto(), &opts).unwrap();
        assert!(!outcome.is_certified());
    }

    #[test]
    fn weak_mean_two_state() {
        let (s, p) = two_state();
        let opts = DeltaOptions::default();
        let q1 = (1.0 - (-2.0_f64).exp()) / 2.0;

        // The kernel is one-dimensional, so the contraction value of a
        // power is the power of the value.
        let report = weak_mean_check(&s, &p, 1.0, 3, auto(), &opts).unwrap();
        assert!((report.q - q1.powi(3)).abs() <= 1e-11);
        assert!(report.certifies);
        let first = report.decay.first().unwrap().1;
        let last = report.decay.last().unwrap().1;
        assert!(last < first);
        for window in report.decay.windows(2) {
            assert!(window[1].1 <= window[0].1 + 1e-12);
        }

        // Power 1 reduces to the mean-certificate value.
        let report = weak_mean_check(&s, &p, 1.0, 1, auto(), &opts).unwrap();
        assert!((report.q - q1).abs() <= 1e-12);

        // The identity semigroup never certifies.
        let space = StateSpace::classical(2).unwrap();
        let ident = Semigroup::discrete(MarkovOperator::identity(space));
        let report = weak_mean_check(&ident, &p, 4.0, 2, auto(), &opts).unwrap();
        assert!((report.q - 1.0).abs() <= 1e-12);
        assert!(!report.certifies);
        assert!(report.decay.is_empty());

        assert!(weak_mean_check(&s, &p, 1.0, 0, auto(), &opts).is_err());
    }

    #[test]
    fn doeblin_two_state_and_identity() {
        let (s, p) = two_state();

        // Long horizon: the average is within 0.1 of P, the minimal
        // compensator vanishes, and the implied contraction bound holds.
        let report = doeblin_check(&s, &p, &p, 0.5, 5.0).unwrap();
        assert!(report.holds);
        assert!(report.exact_sup);
        assert!(report.max_phi_norm.abs() <= 1e-12);
        assert_eq!(report.implied_delta, Some(0.75));
        assert!(report.delta_direct <= 0.75 + 1e-9);

        // Identity semigroup: the compensator must supply tau/2 of mass,
        // twice the allowed budget.
        let space = StateSpace::classical(2).unwrap();
        let ident = Semigroup::discrete(MarkovOperator::identity(space));
        let report = doeblin_check(&ident, &p, &p, 0.5, 1.0).unwrap();
        assert!(!report.holds);
        assert!((report.max_phi_norm - 0.25).abs() <= 1e-12);
        assert_eq!(report.implied_delta, None);

        // Parameter and dominance guards.
        assert!(doeblin_check(&s, &p, &p, 0.0, 1.0).is_err());
        assert!(doeblin_check(&s, &p, &p, 1.5, 1.0).is_err());
        let skew = MarkovProjection::rank_one(space, &[0.3, 0.7], 1e-12).unwrap();
        assert!(matches!(
            doeblin_check(&s, &skew, &p, 0.5, 1.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn doeblin_qubit_parity_thresholds() {
        let (s, p) = pauli_flip();

        // Odd horizon with n0 (1 - tau) >= 1: the average is close enough
        // to P that no compensator is needed.
        let report = doeblin_check(&s, &p, &p, 0.6, 3.0).unwrap();
        assert!(report.holds);
        assert!(!report.exact_sup);
        assert!(report.max_phi_norm <= 1e-9);
        assert!(report.delta_direct <= 1.0 - 0.6 / 2.0 + 1e-9);

        // Even horizon: the average is exactly P.
        let report = doeblin_check(&s, &p, &p, 0.6, 2.0).unwrap();
        assert!(report.holds);
        assert!(report.max_phi_norm <= 1e-12);

        // Horizon 1: the average is the channel itself and the compensator
        // needs norm 0.3 > tau/4.
        let report = doeblin_check(&s, &p, &p, 0.6, 1.0).unwrap();
        assert!(!report.holds);
        assert!((report.max_phi_norm - 0.3).abs() <= 1e-6);
    }

    #[test]
    fn sandwich_inequality_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0050);
        let opts = DeltaOptions::default();
        for _ in 0..30 {
            let n = rand::Rng::random_range(&mut rng, 2..=6);
            let (s, p) = random_invariant_pair(&mut rng, n);
            for t in [0.5, 1.0, 2.0] {
                let tt = s.evaluate(t).unwrap();
                let value = delta_auto(tt.matrix(), &p, &opts).unwrap().value();
                let norm = induced_norm(s.space(), &(tt.matrix() - p.matrix())).unwrap();
                assert!(value <= norm + 1e-9, "delta {value} > norm {norm}");
                assert!(norm <= 2.0 * value + 1e-9, "norm {norm} > 2 delta {value}");
            }
        }
    }

    #[test]
    fn spectral_two_state_pure_exponential() {
        let (s, p) = two_state();
        let opts = DeltaOptions::default();
        let outcome = certify_uniform(&s, &p, Some(&[1.0]), auto(), &opts).unwrap();
        let cert = outcome.certificate().unwrap();

        let report = spectral_check(&s, &p, 200, cert).unwrap();
        let q = (-2.0_f64).exp();
        assert_eq!(report.delta_roots.len(), 200);
        for &root in &report.delta_roots {
            assert!((root - q).abs() <= 1e-10);
        }
        assert!((report.spectral_radius - q).abs() <= 1e-12);
        assert!(report.gap <= 1e-10);
        assert!(report.exp_fit);
        assert!(report.radius_match);
    }

    #[test]
    fn spectral_three_state_mixes_two_rates() {
        let (a, pi) = two_rate_chain();
        let space = StateSpace::classical(3).unwrap();
        let s = Semigroup::continuous(space, a, 1e-9).unwrap();
        let p = MarkovProjection::rank_one(space, &pi, 1e-12).unwrap();
        let opts = DeltaOptions::default();
        let outcome = certify_uniform(&s, &p, Some(&[1.0]), auto(), &opts).unwrap();
        let cert = outcome.certificate().unwrap();

        let report = spectral_check(&s, &p, 200, cert).unwrap();
        // The decay mixes e^{-t} and e^{-3t}: not a pure exponential, and
        // the contraction value exceeds the spectral radius at finite
        // times, yet the roots still converge to r(T_1 - P) = e^{-1}.
        assert!(!report.exp_fit);
        assert!(!report.radius_match);
        assert_eq!(report.exp_fit, report.radius_match);
        assert!((report.spectral_radius - (-1.0_f64).exp()).abs() <= 1e-9);
        assert!(report.gap <= 1e-3);
        let d1 = cert.q;
        let d2 = delta_auto(s.evaluate(2.0).unwrap().matrix(), &p, &opts)
            .unwrap()
            .value();
        assert!((d2 - d1 * d1).abs() > 1e-3);
    }

    #[test]
    fn spectral_collapsed_step() {
        let space = StateSpace::classical(3).unwrap();
        let p = MarkovProjection::rank_one(space, &[0.2, 0.5, 0.3], 1e-12).unwrap();
        let s = Semigroup::discrete(p.operator().clone());
        let opts = DeltaOptions::default();
        let outcome = certify_uniform(&s, &p, None, auto(), &opts).unwrap();
        let cert = outcome.certificate().unwrap();
        assert_eq!(cert.t0, 1.0);
        assert!(cert.q.abs() <= 1e-12);

        let report = spectral_check(&s, &p, 50, cert).unwrap();
        assert!(report.delta_roots.iter().all(|&r| r == 0.0));
        assert!(report.spectral_radius <= 1e-12);
        assert!(report.exp_fit);
        assert!(report.radius_match);
    }

    #[test]
    fn mode_and_parameter_guards() {
        let (s, p) = two_state();
        let opts = DeltaOptions::default();
        let mean = certify_mean(&s, &p, Some(&[1.0]), auto(), &opts).unwrap();
        let mean_cert = mean.certificate().unwrap();
        assert!(matches!(
            spectral_check(&s, &p, 10, mean_cert),
            Err(Error::WrongMode(_))
        ));
        assert!(matches!(
            ume_bound(mean_cert, 0.1),
            Err(Error::InvalidParameter { .. })
        ));

        let uniform = certify_uniform(&s, &p, Some(&[1.0]), auto(), &opts).unwrap();
        let cert = uniform.certificate().unwrap();
        assert!(matches!(
            spectral_check(&s, &p, 0, cert),
            Err(Error::InvalidParameter { .. })
        ));
        assert!(matches!(
            ume_bound(cert, 10.0),
            Err(Error::WrongMode(_))
        ));
        assert!(certify_uniform(&s, &p, Some(&[]), auto(), &opts).is_err());

        // A qubit instance cannot use the exact spectral path.
        let (qs, qp) = pauli_flip();
        let fake = Certificate {
            mode: Mode::Uniform,
            t0: 1.0,
            q: 0.5,
            c: 4.0,
            alpha: (2.0_f64).ln(),
            tau: None,
            n0: None,
            max_phi_norm: None,
            projection: qp.description(),
            grid: vec![1.0],
            measured_curve: vec![],
        };
        assert!(matches!(
            spectral_check(&qs, &qp, 5, &fake),
            Err(Error::UnsupportedSpace(_))
        ));
    }
}
