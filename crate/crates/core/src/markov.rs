//! Markov operators and Markov projections.
//!
//! A Markov operator maps the positive cone into itself and preserves the
//! strictly positive functional f (total mass / trace). In coordinates this
//! means: classical operators are column-stochastic matrices; qubit (Bloch
//! coordinate) operators have first row (1, 0, 0, 0) and map density
//! matrices to density matrices.
//!
//! A Markov projection is an idempotent Markov operator. Classical block
//! projections P = sum_j q_j 1^T_{B_j} average each block B_j into a weight
//! vector q_j; their kernel is the set of vectors with zero mass in every
//! block, which is what the contraction coefficients in [`crate::delta`]
//! measure against.

use crate::error::{Error, Result};
use crate::linalg::max_abs;
use crate::space::{Element, StateSpace};
use nalgebra::{DMatrix, DVector};

/// Number of sampled pure states used for the heuristic qubit positivity
/// check on non-diagonal Bloch matrices.
const QUBIT_POSITIVITY_SAMPLES: usize = 2048;

/// Outcome of [`validate_markov`]: whether the positivity check was exact or
/// sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validation {
    /// All conditions verified exactly (up to floating-point tolerance).
    Exact,
    /// Positivity checked on sampled extreme points only.
    Heuristic,
}

/// Check that `matrix` represents a Markov operator on `space`.
///
/// Classical: entries >= -tol and column sums within tol of 1. Qubit: first
/// row within tol of (1,0,0,0) (trace preservation) plus positivity, exact
/// for Bloch-diagonal matrices (largest |diagonal| <= 1) and via a fixed
/// grid of pure states otherwise.
pub fn validate_markov(space: StateSpace, matrix: &DMatrix<f64>, tol: f64) -> Result<Validation> {
    let d = space.dim();
    if matrix.nrows() != d || matrix.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: matrix.nrows().max(matrix.ncols()),
        });
    }
    if let Some(idx) = matrix.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(idx));
    }
    match space {
        StateSpace::Classical { n } => {
            for j in 0..n {
                let mut sum = 0.0;
                for i in 0..n {
                    let v = matrix[(i, j)];
                    if v < -tol {
                        return Err(Error::NotMarkov(format!(
                            "negative entry {v:.3e} at ({i}, {j})"
                        )));
                    }
                    sum += v;
                }
                if (sum - 1.0).abs() > tol.max(1e-12) * n as f64 {
                    return Err(Error::NotMarkov(format!(
                        "column {j} sums to {sum} instead of 1"
                    )));
                }
            }
            Ok(Validation::Exact)
        }
        StateSpace::Qubit => {
            if (matrix[(0, 0)] - 1.0).abs() > tol
                || matrix[(0, 1)].abs() > tol
                || matrix[(0, 2)].abs() > tol
                || matrix[(0, 3)].abs() > tol
            {
                return Err(Error::NotMarkov(
                    "first Bloch row must be (1, 0, 0, 0) to preserve the trace".into(),
                ));
            }
            if is_bloch_diagonal(matrix, tol) {
                // A diagonal Bloch map (1, d1, d2, d3) is positive exactly
                // when every |d_i| <= 1: the image of the pure state with
                // Bloch direction u is (1/2, (d .* u)/2).
                let worst = matrix[(1, 1)]
                    .abs()
                    .max(matrix[(2, 2)].abs())
                    .max(matrix[(3, 3)].abs());
                if worst > 1.0 + tol {
                    return Err(Error::NotMarkov(format!(
                        "Bloch-diagonal entry of modulus {worst} exceeds 1"
                    )));
                }
                Ok(Validation::Exact)
            } else {
                for u in fibonacci_sphere(QUBIT_POSITIVITY_SAMPLES) {
                    let x = DVector::from_column_slice(&[0.5, u[0] / 2.0, u[1] / 2.0, u[2] / 2.0]);
                    let y = matrix * x;
                    if !space.is_positive_raw(&y, tol.max(1e-9) * 10.0) {
                        return Err(Error::NotMarkov(format!(
                            "image of a pure state leaves the cone (direction {u:?})"
                        )));
                    }
                }
                Ok(Validation::Heuristic)
            }
        }
    }
}

fn is_bloch_diagonal(m: &DMatrix<f64>, tol: f64) -> bool {
    for i in 0..4 {
        for j in 0..4 {
            if i != j && m[(i, j)].abs() > tol {
                return false;
            }
        }
    }
    true
}

/// Deterministic, roughly uniform grid of unit vectors on the 2-sphere.
pub(crate) fn fibonacci_sphere(count: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// A positive, mass-preserving linear operator.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovOperator {
    space: StateSpace,
    matrix: DMatrix<f64>,
}

impl MarkovOperator {
    /// Validate `matrix` and wrap it as a Markov operator.
    pub fn new(space: StateSpace, matrix: DMatrix<f64>, tol: f64) -> Result<Self> {
        validate_markov(space, &matrix, tol)?;
        Ok(MarkovOperator { space, matrix })
    }

    /// Wrap a matrix that is known to be Markov (e.g. a product of validated
    /// operators or a semigroup evaluation).
    pub(crate) fn from_matrix_unchecked(space: StateSpace, matrix: DMatrix<f64>) -> Self {
        MarkovOperator { space, matrix }
    }

    /// The identity operator.
    pub fn identity(space: StateSpace) -> Self {
        MarkovOperator {
            space,
            matrix: DMatrix::identity(space.dim(), space.dim()),
        }
    }

    /// State space the operator acts on.
    pub fn space(&self) -> StateSpace {
        self.space
    }

    /// Coordinate matrix (column-stochastic classically; Bloch matrix for
    /// the qubit).
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Apply the operator to an element.
    pub fn apply(&self, x: &Element) -> Result<Element> {
        if x.space() != self.space {
            return Err(Error::SpaceMismatch(format!(
                "operator on {} applied to element of {}",
                self.space.label(),
                x.space().label()
            )));
        }
        self.space.element_from_vector(&self.matrix * x.coords())
    }

    /// Composition `self . other` (apply `other` first).
    pub fn compose(&self, other: &MarkovOperator) -> Result<MarkovOperator> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch(
                "composing operators on different spaces".into(),
            ));
        }
        Ok(MarkovOperator {
            space: self.space,
            matrix: &self.matrix * &other.matrix,
        })
    }
}

/// Block structure of a classical lumping projection.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockStructure {
    /// Partition of 0..n into disjoint blocks (sorted within and across).
    pub blocks: Vec<Vec<usize>>,
    /// Per-block probability weights, stored as full-length vectors
    /// supported on their block.
    pub weights: Vec<DVector<f64>>,
}

/// An idempotent Markov operator.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovProjection {
    op: MarkovOperator,
    blocks: Option<BlockStructure>,
}

impl MarkovProjection {
    /// Wrap a Markov operator after checking idempotence `P^2 = P`.
    pub fn new(op: MarkovOperator, tol: f64) -> Result<Self> {
        let defect = max_abs(&(op.matrix() * op.matrix() - op.matrix()));
        if defect > tol {
            return Err(Error::NotIdempotent { defect, tol });
        }
        Ok(MarkovProjection { op, blocks: None })
    }

    /// Rank-one projection onto a single probability vector.
    pub fn rank_one(space: StateSpace, weight: &[f64], tol: f64) -> Result<Self> {
        match space {
            StateSpace::Classical { n } => {
                block_projection(space, &[(0..n).collect::<Vec<_>>()], &[weight.to_vec()], tol)
            }
            StateSpace::Qubit => Err(Error::UnsupportedSpace(
                "rank-one block projections are classical; build qubit projections from their \
                 Bloch matrix"
                    .into(),
            )),
        }
    }

    /// Underlying operator.
    pub fn operator(&self) -> &MarkovOperator {
        &self.op
    }

    /// Coordinate matrix of the projection.
    pub fn matrix(&self) -> &DMatrix<f64> {
        self.op.matrix()
    }

    /// State space the projection acts on.
    pub fn space(&self) -> StateSpace {
        self.op.space()
    }

    /// Block structure, when the projection was built as a classical lumping.
    pub fn block_structure(&self) -> Option<&BlockStructure> {
        self.blocks.as_ref()
    }

    /// Dimension of the kernel N_P = { x : P x = 0 }. For an idempotent
    /// matrix the rank equals the trace.
    pub fn kernel_dim(&self) -> usize {
        let d = self.space().dim();
        let rank = self.matrix().trace().round() as i64;
        (d as i64 - rank).max(0) as usize
    }

    /// Whether the projection is the identity (trivial kernel).
    pub fn is_identity(&self, tol: f64) -> bool {
        let d = self.space().dim();
        max_abs(&(self.matrix() - DMatrix::<f64>::identity(d, d))) <= tol
    }

    /// Short description used in serialized reports.
    pub fn description(&self) -> String {
        match &self.blocks {
            Some(bs) => format!(
                "classical block projection: n={}, blocks={:?}",
                self.space().dim(),
                bs.blocks
            ),
            None => format!(
                "projection on {} with rank {}",
                self.space().label(),
                self.matrix().trace().round() as i64
            ),
        }
    }
}

/// Build the classical block (lumping) projection `P = sum_j q_j 1^T_{B_j}`.
///
/// `blocks` must partition `0..n`; `weights[j]` is a probability vector
/// supported on `blocks[j]` (full length `n`). Column `i` of the resulting
/// matrix equals the weight vector of the block containing `i`.
pub fn block_projection(
    space: StateSpace,
    blocks: &[Vec<usize>],
    weights: &[Vec<f64>],
    tol: f64,
) -> Result<MarkovProjection> {
    let n = match space {
        StateSpace::Classical { n } => n,
        StateSpace::Qubit => {
            return Err(Error::UnsupportedSpace(
                "block projections are defined on classical spaces".into(),
            ))
        }
    };
    if blocks.is_empty() || blocks.len() != weights.len() {
        return Err(Error::InvalidPartition(format!(
            "{} blocks but {} weight vectors",
            blocks.len(),
            weights.len()
        )));
    }
    let mut seen = vec![false; n];
    for (j, block) in blocks.iter().enumerate() {
        if block.is_empty() {
            return Err(Error::InvalidPartition(format!("block {j} is empty")));
        }
        for &i in block {
            if i >= n {
                return Err(Error::InvalidPartition(format!(
                    "index {i} out of range for n={n}"
                )));
            }
            if seen[i] {
                return Err(Error::InvalidPartition(format!(
                    "index {i} appears in more than one block"
                )));
            }
            seen[i] = true;
        }
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidPartition(format!(
            "index {missing} is not covered by any block"
        )));
    }

    let mut weight_vectors = Vec::with_capacity(blocks.len());
    for (j, w) in weights.iter().enumerate() {
        if w.len() != n {
            return Err(Error::InvalidPartition(format!(
                "weight vector {j} has length {} instead of {n}",
                w.len()
            )));
        }
        let mut sum = 0.0;
        for (i, &v) in w.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite(i));
            }
            if v < -tol {
                return Err(Error::InvalidPartition(format!(
                    "weight vector {j} has negative entry at {i}"
                )));
            }
            if !blocks[j].contains(&i) && v.abs() > tol {
                return Err(Error::InvalidPartition(format!(
                    "weight vector {j} has mass outside its block at index {i}"
                )));
            }
            sum += v;
        }
        if (sum - 1.0).abs() > tol.max(1e-12) * n as f64 {
            return Err(Error::InvalidPartition(format!(
                "weight vector {j} sums to {sum} instead of 1"
            )));
        }
        weight_vectors.push(DVector::from_column_slice(w));
    }

    let mut matrix = DMatrix::<f64>::zeros(n, n);
    for (j, block) in blocks.iter().enumerate() {
        for &i in block {
            matrix.set_column(i, &weight_vectors[j]);
        }
    }
    let op = MarkovOperator::new(space, matrix, tol.max(1e-12))?;
    let mut sorted_blocks: Vec<Vec<usize>> = blocks.to_vec();
    for b in &mut sorted_blocks {
        b.sort_unstable();
    }
    let mut proj = MarkovProjection::new(op, tol.max(1e-12))?;
    proj.blocks = Some(BlockStructure {
        blocks: sorted_blocks,
        weights: weight_vectors,
    });
    Ok(proj)
}

/// Commutation and invariance relations between an operator and one or two
/// projections.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelationReport {
    /// `T P = P T` within tolerance.
    pub commute: bool,
    /// `T P = P` within tolerance.
    pub right_invariant: bool,
    /// `P T = P` within tolerance.
    pub left_invariant: bool,
    /// `Q <= P`, i.e. `Q = Q P = P Q`, when a second projection was given.
    pub q_under_p: Option<bool>,
    /// Largest defect observed across the checked identities.
    pub max_defect: f64,
}

/// Check `T P = P T`, `T P = P`, `P T = P`, and optionally `Q <= P`.
pub fn projection_relations(
    t: &MarkovOperator,
    p: &MarkovProjection,
    q: Option<&MarkovProjection>,
    tol: f64,
) -> Result<RelationReport> {
    if t.space() != p.space() {
        return Err(Error::SpaceMismatch(
            "operator and projection on different spaces".into(),
        ));
    }
    let tp = t.matrix() * p.matrix();
    let pt = p.matrix() * t.matrix();
    let d_commute = max_abs(&(&tp - &pt));
    let d_right = max_abs(&(&tp - p.matrix()));
    let d_left = max_abs(&(&pt - p.matrix()));
    let mut max_defect = d_commute.max(d_right.min(d_left));
    let q_under_p = match q {
        None => None,
        Some(qp) => {
            if qp.space() != p.space() {
                return Err(Error::SpaceMismatch(
                    "projections on different spaces".into(),
                ));
            }
            let d1 = max_abs(&(qp.matrix() * p.matrix() - qp.matrix()));
            let d2 = max_abs(&(p.matrix() * qp.matrix() - qp.matrix()));
            max_defect = max_defect.max(d1.max(d2));
            Some(d1 <= tol && d2 <= tol)
        }
    };
    Ok(RelationReport {
        commute: d_commute <= tol,
        right_invariant: d_right <= tol,
        left_invariant: d_left <= tol,
        q_under_p,
        max_defect,
    })
}
