//! Ordered state spaces with a distinguished positive cone and base.
//!
//! Two concrete spaces are provided:
//!
//! * `Classical { n }`: real n-vectors, cone = entrywise nonnegative, base
//!   norm = l1, strictly positive functional f(x) = sum of coordinates. The
//!   base (f = 1 on the cone) is the probability simplex.
//! * `Qubit`: Hermitian 2x2 matrices in Bloch coordinates (w0, w1, w2, w3)
//!   for x = w0*I + w1*s1 + w2*s2 + w3*s3 (s_i the Pauli matrices), cone =
//!   positive semidefinite, base norm = trace norm, f(x) = trace = 2*w0. The
//!   base is the set of density matrices.
//!
//! The trace norm has the closed form 2*max(|w0|, ||(w1,w2,w3)||_2): the
//! eigenvalues of x are w0 +/- ||(w1,w2,w3)||_2.

use crate::error::{Error, Result};
use nalgebra::DVector;

/// Coordinate dimension of the qubit Bloch representation.
pub const QUBIT_DIM: usize = 4;

/// A finite-dimensional ordered state space with base norm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateSpace {
    /// Real n-dimensional space with the l1 norm and the simplex base.
    Classical {
        /// Number of classical states.
        n: usize,
    },
    /// Hermitian 2x2 matrices in Bloch coordinates with the trace norm.
    Qubit,
}

impl StateSpace {
    /// Classical n-state space; `n` must be at least 1.
    pub fn classical(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "classical space needs at least one state".into(),
            });
        }
        Ok(StateSpace::Classical { n })
    }

    /// The qubit (Bloch-coordinate) space.
    pub fn qubit() -> Self {
        StateSpace::Qubit
    }

    /// Coordinate dimension (`n` classical, 4 for the qubit).
    pub fn dim(&self) -> usize {
        match self {
            StateSpace::Classical { n } => *n,
            StateSpace::Qubit => QUBIT_DIM,
        }
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        match self {
            StateSpace::Classical { n } => format!("classical(n={n})"),
            StateSpace::Qubit => "qubit".into(),
        }
    }

    /// Wrap coordinates as a validated element of this space.
    pub fn element(&self, coords: &[f64]) -> Result<Element> {
        self.element_from_vector(DVector::from_column_slice(coords))
    }

    /// Wrap an owned coordinate vector as a validated element.
    pub fn element_from_vector(&self, coords: DVector<f64>) -> Result<Element> {
        if coords.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: coords.len(),
            });
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Element {
            space: *self,
            coords,
        })
    }

    /// Base norm of a raw coordinate vector (dimension must already match).
    pub(crate) fn base_norm_raw(&self, coords: &DVector<f64>) -> f64 {
        match self {
            StateSpace::Classical { .. } => coords.iter().map(|c| c.abs()).sum(),
            StateSpace::Qubit => {
                let r = bloch_radius(coords);
                2.0 * coords[0].abs().max(r)
            }
        }
    }

    /// Strictly positive functional of a raw coordinate vector.
    pub(crate) fn functional_raw(&self, coords: &DVector<f64>) -> f64 {
        match self {
            StateSpace::Classical { .. } => coords.iter().sum(),
            StateSpace::Qubit => 2.0 * coords[0],
        }
    }

    /// Cone membership of a raw coordinate vector, up to `tol`.
    pub(crate) fn is_positive_raw(&self, coords: &DVector<f64>, tol: f64) -> bool {
        match self {
            StateSpace::Classical { .. } => coords.iter().all(|c| *c >= -tol),
            StateSpace::Qubit => {
                let r = bloch_radius(coords);
                coords[0] >= -tol && r <= coords[0] + tol
            }
        }
    }
}

/// Euclidean length of the Bloch vector part (w1, w2, w3).
fn bloch_radius(coords: &DVector<f64>) -> f64 {
    (coords[1] * coords[1] + coords[2] * coords[2] + coords[3] * coords[3]).sqrt()
}

/// A validated point of a state space.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    space: StateSpace,
    coords: DVector<f64>,
}

impl Element {
    /// The space this element belongs to.
    pub fn space(&self) -> StateSpace {
        self.space
    }

    /// Coordinate vector (classical entries, or Bloch coordinates).
    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    /// Base norm: l1 for classical vectors, trace norm for the qubit.
    pub fn base_norm(&self) -> f64 {
        self.space.base_norm_raw(&self.coords)
    }

    /// The strictly positive functional f (total mass / trace).
    pub fn functional(&self) -> f64 {
        self.space.functional_raw(&self.coords)
    }

    /// Membership in the positive cone, up to `tol`.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.space.is_positive_raw(&self.coords, tol)
    }

    /// Whether the element lies in the base: positive with f(x) = 1.
    pub fn in_base(&self, tol: f64) -> bool {
        self.is_positive(tol) && (self.functional() - 1.0).abs() <= tol
    }
}
