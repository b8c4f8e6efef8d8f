//! Worked qubit example: the Pauli-diagonal channel family, the dephasing
//! channel whose powers oscillate but whose Cesaro averages converge, and
//! the Doeblin thresholds for its averaged dynamics.
//!
//! Everything here runs in Bloch coordinates with closed-form trace norms;
//! the analytic values double as oracles for the generic machinery.

use crate::error::{Error, Result};
use crate::markov::{MarkovOperator, MarkovProjection};
use crate::space::StateSpace;
use nalgebra::{DMatrix, DVector};

/// A Pauli-diagonal channel, acting on Bloch coordinates as
/// `diag(1, lambda, mu, kappa)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliChannel {
    /// Scale on the first Bloch component.
    pub lambda: f64,
    /// Scale on the second Bloch component.
    pub mu: f64,
    /// Scale on the third Bloch component.
    pub kappa: f64,
}

impl PauliChannel {
    /// Build a channel; Markovianity is exactly `max(|l|,|m|,|k|) <= 1`.
    pub fn new(lambda: f64, mu: f64, kappa: f64) -> Result<Self> {
        for (name, v) in [("lambda", lambda), ("mu", mu), ("kappa", kappa)] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        let top = lambda.abs().max(mu.abs()).max(kappa.abs());
        if top > 1.0 {
            return Err(Error::NotMarkov(format!(
                "Pauli coefficients have max magnitude {top} > 1"
            )));
        }
        Ok(Self { lambda, mu, kappa })
    }

    /// The Bloch-coordinate matrix `diag(1, lambda, mu, kappa)`.
    pub fn bloch_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&[
            1.0,
            self.lambda,
            self.mu,
            self.kappa,
        ]))
    }

    /// The channel as a validated Markov operator on the qubit space.
    pub fn operator(&self) -> MarkovOperator {
        MarkovOperator::new(StateSpace::qubit(), self.bloch_matrix(), 1e-9)
            .expect("Pauli coefficients within the unit cube are Markov")
    }
}

/// The dephasing channel `diag(1, -1, 0, 1)` driving the example.
pub fn phi() -> PauliChannel {
    PauliChannel {
        lambda: -1.0,
        mu: 0.0,
        kappa: 1.0,
    }
}

/// The limiting projection `diag(1, 0, 0, 1)` onto the dephased states.
pub fn projection_p() -> MarkovProjection {
    let op = PauliChannel {
        lambda: 0.0,
        mu: 0.0,
        kappa: 1.0,
    }
    .operator();
    MarkovProjection::new(op, 1e-12).expect("dephasing is idempotent")
}

/// Indicator of the odd integers.
pub fn chi_odd(n: u64) -> f64 {
    (n % 2) as f64
}

/// The `n`-th power of the dephasing channel in closed form: the identity
/// at `n = 0`, alternating sign on the first Bloch component afterwards.
pub fn phi_power(n: u64) -> PauliChannel {
    if n == 0 {
        PauliChannel {
            lambda: 1.0,
            mu: 1.0,
            kappa: 1.0,
        }
    } else {
        PauliChannel {
            lambda: if n % 2 == 0 { 1.0 } else { -1.0 },
            mu: 0.0,
            kappa: 1.0,
        }
    }
}

/// Cesaro average of the first `n >= 1` powers of the dephasing channel:
/// `diag(1, -chi_odd(n)/n, 0, 1)`, matching the direct average exactly.
pub fn cesaro_phi(n: u64) -> Result<MarkovOperator> {
    if n < 1 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "the Cesaro average needs at least one term".into(),
        });
    }
    let first = if n % 2 == 0 { 0.0 } else { -1.0 / n as f64 };
    let channel = PauliChannel {
        lambda: first,
        mu: 0.0,
        kappa: 1.0,
    };
    Ok(channel.operator())
}

/// Induced trace-norm of a Bloch-diagonal matrix: the largest magnitude
/// among the diagonal entries (attained at a pure state along that axis).
pub fn diagonal_induced_norm(diag: &[f64; 4]) -> f64 {
    diag.iter().fold(0.0_f64, |acc, d| acc.max(d.abs()))
}

/// Contraction coefficient of a Bloch-diagonal matrix relative to the
/// dephasing projection: the kernel is spanned by the two equatorial axes,
/// so the coefficient reduces to `max(|d1|, |d2|)`.
pub fn diagonal_delta_p(diag: &[f64; 4]) -> f64 {
    diag[1].abs().max(diag[2].abs())
}

/// Whether the Doeblin-type mean condition for the averaged dephasing
/// channel holds with a vanishing defect: the positivity criterion
/// (squared Euclidean Bloch norm against the trace component) gives
/// `n even` or `n (1 - tau) >= 1`.
pub fn doeblin_phi0_holds(n: u64, tau: f64) -> bool {
    n % 2 == 0 || n as f64 * (1.0 - tau) >= 1.0
}

/// One row of the example table.
#[derive(Debug, Clone)]
pub struct QubitExampleRow {
    /// Number of steps.
    pub n: u64,
    /// `||Phi^n - P||` (constant 1: powers never converge uniformly).
    pub norm_phi_minus_p: f64,
    /// `||A_n - P||` = `chi_odd(n)/n` (averages do converge).
    pub norm_cesaro_minus_p: f64,
    /// Contraction coefficient of the average relative to `P`.
    pub delta_p_cesaro: f64,
    /// Per-tau flags for the vanishing-defect Doeblin condition.
    pub doeblin_holds_phi0: Vec<bool>,
}

/// Per-tau comparison of the first passing step against the analytic
/// sufficient threshold.
#[derive(Debug, Clone, Copy)]
pub struct TauThreshold {
    /// Doeblin parameter.
    pub tau: f64,
    /// Smallest `n` at which the vanishing-defect condition holds.
    pub first_n0: u64,
    /// The sufficient threshold `ceil(1/(1 - tau))` for odd steps.
    pub sufficient_n0: u64,
}

/// The full example table.
#[derive(Debug, Clone)]
pub struct QubitExampleReport {
    /// Doeblin parameters, one per flag column.
    pub taus: Vec<f64>,
    /// Rows for `n = 1..=n_max`.
    pub rows: Vec<QubitExampleRow>,
    /// Threshold comparison per tau.
    pub thresholds: Vec<TauThreshold>,
}

impl QubitExampleReport {
    /// Render the table as CSV.
    pub fn csv(&self) -> String {
        let mut out = String::from("n,norm_phi_n_minus_P,norm_cesaro_minus_P,delta_P_cesaro");
        for tau in &self.taus {
            out.push_str(&format!(",doeblin_holds_phi0_tau_{tau}"));
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e}",
                row.n, row.norm_phi_minus_p, row.norm_cesaro_minus_p, row.delta_p_cesaro
            ));
            for flag in &row.doeblin_holds_phi0 {
                out.push_str(if *flag { ",true" } else { ",false" });
            }
            out.push('\n');
        }
        out
    }
}

/// Compute the example table for `n = 1..=n_max` and the given Doeblin
/// parameters, each strictly inside `(0, 1)`.
pub fn example_report(n_max: u64, taus: &[f64]) -> Result<QubitExampleReport> {
    if n_max < 2 {
        return Err(Error::InvalidParameter {
            name: "n_max",
            reason: format!("the table needs at least two rows, got {n_max}"),
        });
    }
    for &tau in taus {
        if !(tau.is_finite() && 0.0 < tau && tau < 1.0) {
            return Err(Error::InvalidParameter {
                name: "tau",
                reason: format!("Doeblin parameters must lie in (0, 1), got {tau}"),
            });
        }
    }
    let p_diag = [1.0, 0.0, 0.0, 1.0];
    let mut rows = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        let power = phi_power(n);
        let power_diag = [1.0, power.lambda, power.mu, power.kappa];
        let avg_first = if n % 2 == 0 { 0.0 } else { -1.0 / n as f64 };
        let avg_diag = [1.0, avg_first, 0.0, 1.0];
        let diff = |a: &[f64; 4]| {
            [
                a[0] - p_diag[0],
                a[1] - p_diag[1],
                a[2] - p_diag[2],
                a[3] - p_diag[3],
            ]
        };
        rows.push(QubitExampleRow {
            n,
            norm_phi_minus_p: diagonal_induced_norm(&diff(&power_diag)),
            norm_cesaro_minus_p: diagonal_induced_norm(&diff(&avg_diag)),
            delta_p_cesaro: diagonal_delta_p(&avg_diag),
            doeblin_holds_phi0: taus.iter().map(|&tau| doeblin_phi0_holds(n, tau)).collect(),
        });
    }
    let thresholds = taus
        .iter()
        .map(|&tau| {
            let first_n0 = (1..)
                .find(|&n| doeblin_phi0_holds(n, tau))
                .expect("n = 2 always passes");
            TauThreshold {
                tau,
                first_n0,
                sufficient_n0: (1.0 / (1.0 - tau)).ceil() as u64,
            }
        })
        .collect();
    Ok(QubitExampleReport {
        taus: taus.to_vec(),
        rows,
        thresholds,
    })
}
