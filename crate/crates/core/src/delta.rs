//! Generalized Dobrushin ergodicity coefficients.
//!
//! For a linear map `T` and a Markov projection `P`, the coefficient is the
//! operator norm of `T` restricted to the kernel subspace `N_P = {x : Px = 0}`:
//! `delta_P(T) = sup { base_norm(Tx) / base_norm(x) : x in N_P, x != 0 }`,
//! with the convention `delta_P(T) = 1` when `P` is the identity. Block
//! projections admit an exact finite reduction; arbitrary classical
//! projections are handled by vertex enumeration in small dimension; the
//! general case is bracketed between an optimized lower bound and a certified
//! upper bound.

use crate::error::{Error, Result};
use crate::linalg::{l1_operator_norm, sigma_max};
use crate::markov::{validate_markov, MarkovProjection};
use crate::space::{Element, StateSpace};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Which algorithm produced a [`DeltaResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaMethod {
    /// Exact reduction over same-block vertex pairs of a block projection.
    BlockExact,
    /// Exact maximization over the vertices of the kernel cross-polytope.
    VertexEnumeration,
    /// Exact pair-form supremum over kernel vertex pairs.
    PairFormula,
    /// Lower bound by search, upper bound by a certified norm estimate.
    Bracket,
}

/// Tuning knobs for the coefficient computations.
#[derive(Debug, Clone)]
pub struct DeltaOptions {
    /// Structural tolerance (idempotence checks, kernel membership).
    pub tol: f64,
    /// Random restarts for the bracket search.
    pub restarts: usize,
    /// Seed for the deterministic search RNG.
    pub seed: u64,
    /// Largest dimension admitted by the vertex enumeration.
    pub max_enum_dim: usize,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        DeltaOptions {
            tol: crate::DEFAULT_TOL,
            restarts: 16,
            seed: 0x5eed,
            max_enum_dim: 10,
        }
    }
}

/// Outcome of a coefficient computation: a bracket `[lower, upper]` that
/// collapses to a point for the exact methods.
#[derive(Debug, Clone)]
pub struct DeltaResult {
    /// Realized lower bound (a ratio actually attained by some kernel vector).
    pub lower: f64,
    /// Certified upper bound; equals `lower` for exact methods.
    pub upper: f64,
    /// Algorithm that produced the result.
    pub method: DeltaMethod,
    /// A kernel vector of base norm one achieving (or nearly achieving) the
    /// supremum; absent when the kernel is trivial.
    pub witness: Option<Element>,
}

impl DeltaResult {
    /// Certified upper estimate of the coefficient; for exact methods this is
    /// the coefficient itself.
    pub fn value(&self) -> f64 {
        self.upper
    }

    /// Whether the result is a single exact value rather than a bracket.
    pub fn is_exact(&self) -> bool {
        !matches!(self.method, DeltaMethod::Bracket)
    }
}

fn exact_point(value: f64, method: DeltaMethod, witness: Option<Element>) -> DeltaResult {
    DeltaResult {
        lower: value,
        upper: value,
        method,
        witness,
    }
}

fn check_dims(t: &DMatrix<f64>, d: usize) -> Result<()> {
    if t.nrows() != d || t.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: t.nrows().max(t.ncols()),
        });
    }
    if let Some(idx) = t.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(idx));
    }
    Ok(())
}

fn require_classical(space: StateSpace) -> Result<usize> {
    match space {
        StateSpace::Classical { n } => Ok(n),
        StateSpace::Qubit => Err(Error::UnsupportedSpace(
            "this coefficient method needs a classical space".into(),
        )),
    }
}

/// Half the l1 norm of the column difference `T e_i - T e_k`.
fn half_pair_norm(t: &DMatrix<f64>, i: usize, k: usize) -> f64 {
    let mut acc = 0.0;
    for r in 0..t.nrows() {
        acc += (t[(r, i)] - t[(r, k)]).abs();
    }
    acc / 2.0
}

fn pair_witness(space: StateSpace, n: usize, i: usize, k: usize) -> Element {
    let mut coords = DVector::zeros(n);
    coords[i] = 0.5;
    coords[k] = -0.5;
    space
        .element_from_vector(coords)
        .expect("pair witness has valid coordinates")
}

/// Exact coefficient of `t` relative to a classical block projection.
///
/// The kernel of a block projection is the set of vectors with zero block
/// sums, and the extreme points of its intersection with the l1 unit ball
/// are `(e_i - e_k)/2` for `i, k` in a common block; maximizing the convex
/// objective over those points gives the supremum. Ties resolve to the
/// lexicographically smallest `(block, i, k)`.
pub fn delta_exact(t: &DMatrix<f64>, p: &MarkovProjection) -> Result<DeltaResult> {
    let n = require_classical(p.space())?;
    check_dims(t, n)?;
    let blocks = p.block_structure().ok_or_else(|| {
        Error::Precondition("exact coefficient needs a projection in block form".into())
    })?;
    let mut best: Option<(f64, usize, usize)> = None;
    for block in &blocks.blocks {
        for a in 0..block.len() {
            for b in (a + 1)..block.len() {
                let (i, k) = (block[a], block[b]);
                let val = half_pair_norm(t, i, k);
                if best.map_or(true, |(v, _, _)| val > v) {
                    best = Some((val, i, k));
                }
            }
        }
    }
    match best {
        None => Ok(exact_point(1.0, DeltaMethod::BlockExact, None)),
        Some((val, i, k)) => Ok(exact_point(
            val,
            DeltaMethod::BlockExact,
            Some(pair_witness(p.space(), n, i, k)),
        )),
    }
}

/// Exact coefficient through the pair-form supremum
/// `(1/2) sup { base_norm(Tu - Tv) }` over probability-vector vertices
/// `u = e_i, v = e_k` whose difference lies in the kernel of `P`.
///
/// Works directly from the projection matrix (pairs are admitted by testing
/// `P(e_i - e_k) = 0`) and must agree with [`delta_exact`].
pub fn delta_pair_formula(t: &DMatrix<f64>, p: &MarkovProjection) -> Result<DeltaResult> {
    let n = require_classical(p.space())?;
    check_dims(t, n)?;
    if p.block_structure().is_none() {
        return Err(Error::Precondition(
            "pair formula needs a projection in block form".into(),
        ));
    }
    let pm = p.matrix();
    let mut best: Option<(f64, usize, usize)> = None;
    for i in 0..n {
        for k in (i + 1)..n {
            let in_kernel = (0..n).all(|r| (pm[(r, i)] - pm[(r, k)]).abs() <= 1e-12);
            if !in_kernel {
                continue;
            }
            let val = half_pair_norm(t, i, k);
            if best.map_or(true, |(v, _, _)| val > v) {
                best = Some((val, i, k));
            }
        }
    }
    match best {
        None => Ok(exact_point(1.0, DeltaMethod::PairFormula, None)),
        Some((val, i, k)) => Ok(exact_point(
            val,
            DeltaMethod::PairFormula,
            Some(pair_witness(p.space(), n, i, k)),
        )),
    }
}

/// Exact coefficient of `t` relative to an arbitrary idempotent classical
/// projection matrix `p` (not necessarily Markov), by enumerating the
/// vertices of the polytope `{x : Px = 0, l1_norm(x) <= 1}`.
///
/// A vertex with support `S` and sign pattern `s` is the unique solution of
/// `P z = 0` restricted to `S` together with `sum_i s_i z_i = 1`; the
/// enumeration walks all `(S, s)` combinations (up to negation) and keeps
/// solutions with full column rank, near-zero residual, and strictly signed
/// coordinates. Guarded to `n <= max_enum_dim` (combinatorial cost `3^n`).
pub fn delta_vertex_enum(
    t: &DMatrix<f64>,
    p: &DMatrix<f64>,
    opts: &DeltaOptions,
) -> Result<DeltaResult> {
    let n = p.nrows();
    if p.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: p.ncols(),
        });
    }
    check_dims(t, n)?;
    if n > opts.max_enum_dim {
        return Err(Error::DimensionGuard {
            n,
            max: opts.max_enum_dim,
        });
    }
    let idem_defect = crate::linalg::max_abs(&(p * p - p));
    if idem_defect > opts.tol {
        return Err(Error::NotIdempotent {
            defect: idem_defect,
            tol: opts.tol,
        });
    }
    let space = StateSpace::classical(n)?;
    let mut best: Option<(f64, DVector<f64>)> = None;
    let mut rhs = DVector::zeros(n + 1);
    rhs[n] = 1.0;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let s = support.len();
        // Fix the first sign to + : (S, s) and (S, -s) give mirrored vertices
        // with the same objective.
        for sign_mask in 0..(1u32 << (s.saturating_sub(1))) {
            let signs: Vec<f64> = (0..s)
                .map(|j| {
                    if j == 0 {
                        1.0
                    } else if sign_mask >> (j - 1) & 1 == 1 {
                        -1.0
                    } else {
                        1.0
                    }
                })
                .collect();
            let mut m = DMatrix::zeros(n + 1, s);
            for (col, &i) in support.iter().enumerate() {
                for r in 0..n {
                    m[(r, col)] = p[(r, i)];
                }
                m[(n, col)] = signs[col];
            }
            let z = match solve_consistent_full_rank(&m, &rhs) {
                Some(z) => z,
                None => continue,
            };
            if (&m * &z - &rhs).amax() > 1e-9 {
                continue;
            }
            if (0..s).any(|j| signs[j] * z[j] <= 1e-12) {
                continue;
            }
            let mut x = DVector::zeros(n);
            for (col, &i) in support.iter().enumerate() {
                x[i] = z[col];
            }
            let val = (t * &x).abs().sum();
            if best.as_ref().map_or(true, |(v, _)| val > *v) {
                best = Some((val, x));
            }
        }
    }
    match best {
        // No vertices means a trivial kernel, i.e. P = I.
        None => Ok(exact_point(1.0, DeltaMethod::VertexEnumeration, None)),
        Some((val, x)) => Ok(exact_point(
            val,
            DeltaMethod::VertexEnumeration,
            Some(space.element_from_vector(x)?),
        )),
    }
}

/// Orthonormal basis of the range of `I - P`, i.e. of the kernel of `P`.
///
/// Built by pivoted modified Gram-Schmidt on the columns of `I - P`, followed
/// by one polishing application of `I - P` (the identity on its own range):
/// every basis vector is then annihilated by `P` to machine precision.
fn kernel_basis(p: &MarkovProjection) -> DMatrix<f64> {
    let d = p.space().dim();
    let k = p.kernel_dim();
    let complement = DMatrix::<f64>::identity(d, d) - p.matrix();
    let mut cols: Vec<DVector<f64>> = (0..d).map(|j| complement.column(j).into()).collect();
    let mut picked: Vec<DVector<f64>> = Vec::with_capacity(k);
    for _ in 0..k {
        let (idx, norm) = cols
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.norm()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite norms"))
            .expect("kernel dimension bounded by the space dimension");
        if norm <= 1e-12 {
            break;
        }
        let b = cols.swap_remove(idx) / norm;
        for c in cols.iter_mut() {
            let proj = b.dot(c);
            *c -= &b * proj;
        }
        picked.push(b);
    }
    let mut basis = DMatrix::zeros(d, picked.len());
    for (out, b) in picked.iter().enumerate() {
        let mut polished = &complement * b;
        for prev in 0..out {
            let col: DVector<f64> = basis.column(prev).into();
            let proj = col.dot(&polished);
            polished -= col * proj;
        }
        let norm = polished.norm();
        basis.set_column(out, &(polished / norm));
    }
    basis
}

/// Solve `M z = rhs` for a tall matrix with full column rank when the system
/// is consistent; `None` on rank deficiency or inconsistency. Gaussian
/// elimination with partial pivoting on the augmented system.
fn solve_consistent_full_rank(m: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let rows = m.nrows();
    let cols = m.ncols();
    let mut aug = DMatrix::zeros(rows, cols + 1);
    aug.view_mut((0, 0), (rows, cols)).copy_from(m);
    aug.set_column(cols, rhs);
    let scale = m.amax().max(1.0);
    for col in 0..cols {
        let (piv, piv_val) = (col..rows)
            .map(|r| (r, aug[(r, col)].abs()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite entries"))
            .expect("rows exceed columns");
        if piv_val <= 1e-10 * scale {
            return None;
        }
        aug.swap_rows(col, piv);
        for r in (col + 1)..rows {
            let f = aug[(r, col)] / aug[(col, col)];
            if f != 0.0 {
                for c in col..=cols {
                    aug[(r, c)] -= f * aug[(col, c)];
                }
            }
        }
    }
    for r in cols..rows {
        if aug[(r, cols)].abs() > 1e-9 * scale {
            return None;
        }
    }
    let mut z = DVector::zeros(cols);
    for col in (0..cols).rev() {
        let mut acc = aug[(col, cols)];
        for c in (col + 1)..cols {
            acc -= aug[(col, c)] * z[c];
        }
        z[col] = acc / aug[(col, col)];
    }
    Some(z)
}

/// Ratio `base_norm(T B c) / base_norm(B c)` for a coefficient vector `c`.
fn kernel_ratio(space: StateSpace, tb: &DMatrix<f64>, b: &DMatrix<f64>, c: &DVector<f64>) -> f64 {
    let x = b * c;
    let denom = space.base_norm_raw(&x);
    if denom <= 1e-300 {
        return 0.0;
    }
    space.base_norm_raw(&(tb * c)) / denom
}

/// Bracket the coefficient: the lower bound is the best ratio found by a
/// seeded pattern search over the kernel sphere (random, axis, and structured
/// starts); the upper bound is a certified norm bound for `T(I - P)`.
///
/// Classical upper: the exact induced l1 norm of `T(I - P)`. Qubit upper:
/// `sqrt(2) * sigma_max(T(I - P))` (which dominates the trace-norm induced
/// norm), capped at 1 when `t` validates as a Markov operator. A trivial
/// kernel yields the degenerate bracket `(0, 0)` — the supremum over an
/// empty set — unlike the identity-projection convention of the exact
/// methods.
pub fn delta_bracket(
    t: &DMatrix<f64>,
    p: &MarkovProjection,
    opts: &DeltaOptions,
) -> Result<DeltaResult> {
    let space = p.space();
    let d = space.dim();
    check_dims(t, d)?;
    let basis = kernel_basis(p);
    let k = basis.ncols();
    if k == 0 {
        return Ok(DeltaResult {
            lower: 0.0,
            upper: 0.0,
            method: DeltaMethod::Bracket,
            witness: None,
        });
    }
    let tb = t * &basis;

    // Certified upper bound on the ratio over the kernel.
    let complement = DMatrix::<f64>::identity(d, d) - p.matrix();
    let t_complement = t * &complement;
    let mut upper = match space {
        StateSpace::Classical { .. } => l1_operator_norm(&t_complement),
        StateSpace::Qubit => 2.0_f64.sqrt() * sigma_max(&t_complement),
    };
    if validate_markov(space, t, crate::DEFAULT_TOL).is_ok() {
        upper = upper.min(1.0);
    }

    // Starting directions: axes of the coefficient space, projections of
    // structured state-space directions, then seeded random vectors.
    let mut starts: Vec<DVector<f64>> = Vec::new();
    for a in 0..k {
        let mut c = DVector::zeros(k);
        c[a] = 1.0;
        starts.push(c);
    }
    let mut push_projected = |v: DVector<f64>| {
        let c = basis.transpose() * v;
        if c.norm() > 1e-10 {
            starts.push(c.normalize());
        }
    };
    match space {
        StateSpace::Classical { n } => {
            for i in 0..n {
                for j in (i + 1)..n {
                    let mut v = DVector::zeros(n);
                    v[i] = 0.5;
                    v[j] = -0.5;
                    push_projected(v);
                }
            }
        }
        StateSpace::Qubit => {
            for i in 0..4 {
                let mut v = DVector::zeros(4);
                v[i] = 1.0;
                push_projected(v);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.restarts {
        let c = DVector::from_fn(k, |_, _| rng.random_range(-1.0..1.0));
        if c.norm() > 1e-10 {
            starts.push(c.normalize());
        }
    }

    let mut best_val = 0.0;
    let mut best_c: Option<DVector<f64>> = None;
    for start in starts {
        let mut c = start.normalize();
        let mut val = kernel_ratio(space, &tb, &basis, &c);
        let mut step = 0.5;
        while step > 1e-6 {
            let mut improved = false;
            for a in 0..k {
                for dir in [1.0, -1.0] {
                    let mut cand = c.clone();
                    cand[a] += dir * step;
                    let norm = cand.norm();
                    if norm <= 1e-10 {
                        continue;
                    }
                    cand /= norm;
                    let cand_val = kernel_ratio(space, &tb, &basis, &cand);
                    if cand_val > val + 1e-15 {
                        c = cand;
                        val = cand_val;
                        improved = true;
                    }
                }
            }
            if !improved {
                step /= 2.0;
            }
        }
        if val > best_val {
            best_val = val;
            best_c = Some(c);
        }
    }

    // Crossings are floating noise: keep the interval ordered.
    let lower = best_val.min(upper);
    let upper = upper.max(best_val);
    let witness = best_c.map(|c| {
        let x = &basis * c;
        let norm = space.base_norm_raw(&x);
        space
            .element_from_vector(x / norm)
            .expect("witness has valid coordinates")
    });
    Ok(DeltaResult {
        lower,
        upper,
        method: DeltaMethod::Bracket,
        witness,
    })
}

/// Induced operator norm of `m` on the given space.
///
/// Classical: the exact maximum column l1 norm. Qubit: the supremum of the
/// image trace norm over pure states (the extreme points of the Hermitian
/// trace-norm ball), located by a deterministic Fibonacci-grid scan of the
/// Bloch sphere followed by local pattern refinement — a stabilized heuristic
/// rather than a certified bound.
pub fn induced_norm(space: StateSpace, m: &DMatrix<f64>) -> Result<f64> {
    let d = space.dim();
    check_dims(m, d)?;
    match space {
        StateSpace::Classical { .. } => Ok(l1_operator_norm(m)),
        StateSpace::Qubit => Ok(max_over_pure_states(|x| space.base_norm_raw(&(m * x)))),
    }
}

/// Maximize `eval` over pure qubit states `(1/2, u/2)`, `u` on the Bloch
/// sphere: a deterministic Fibonacci-grid scan followed by local pattern
/// refinement around the best grid points. A stabilized heuristic, not a
/// certified bound.
pub(crate) fn max_over_pure_states<F: Fn(&DVector<f64>) -> f64>(eval: F) -> f64 {
    let at = |theta: f64, phi: f64| -> f64 {
        let u = [
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        ];
        let x = DVector::from_column_slice(&[0.5, u[0] / 2.0, u[1] / 2.0, u[2] / 2.0]);
        eval(&x)
    };
    // Deterministic coarse scan.
    let count = 2048;
    let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    let mut top: Vec<(f64, f64, f64)> = Vec::new();
    for i in 0..count {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / count as f64;
        let theta = z.acos();
        let phi = golden * i as f64;
        let val = at(theta, phi);
        top.push((val, theta, phi));
    }
    top.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    top.truncate(8);
    // Local refinement around the best grid points.
    let mut best = f64::NEG_INFINITY;
    for &(val0, theta0, phi0) in &top {
        let (mut val, mut theta, mut phi) = (val0, theta0, phi0);
        let mut step = 0.1;
        while step > 1e-9 {
            let mut improved = false;
            for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                let cand = at(theta + dt, phi + dp);
                if cand > val + 1e-16 {
                    val = cand;
                    theta += dt;
                    phi += dp;
                    improved = true;
                }
            }
            if !improved {
                step /= 2.0;
            }
        }
        best = best.max(val);
    }
    best
}

/// Pick the best available method: exact for classical block projections,
/// vertex enumeration for other classical projections in small dimension,
/// bracket otherwise. The identity projection returns 1 by convention.
pub fn delta_auto(
    t: &DMatrix<f64>,
    p: &MarkovProjection,
    opts: &DeltaOptions,
) -> Result<DeltaResult> {
    if p.is_identity(opts.tol) {
        return Ok(exact_point(1.0, DeltaMethod::BlockExact, None));
    }
    match p.space() {
        StateSpace::Classical { n } => {
            if p.block_structure().is_some() {
                delta_exact(t, p)
            } else if n <= opts.max_enum_dim {
                delta_vertex_enum(t, p.matrix(), opts)
            } else {
                delta_bracket(t, p, opts)
            }
        }
        StateSpace::Qubit => delta_bracket(t, p, opts),
    }
}

/// A named coefficient algorithm selectable at runtime.
pub trait DeltaStrategy: Send + Sync {
    /// Registry name.
    fn name(&self) -> &'static str;
    /// One-line description for listings.
    fn description(&self) -> &'static str;
    /// Run the algorithm.
    fn compute(
        &self,
        t: &DMatrix<f64>,
        p: &MarkovProjection,
        opts: &DeltaOptions,
    ) -> Result<DeltaResult>;
}

struct BlockExactStrategy;
struct PairFormulaStrategy;
struct VertexEnumStrategy;
struct BracketStrategy;
struct AutoStrategy;

impl DeltaStrategy for BlockExactStrategy {
    fn name(&self) -> &'static str {
        "block-exact"
    }
    fn description(&self) -> &'static str {
        "exact value over same-block vertex pairs (classical block projections)"
    }
    fn compute(
        &self,
        t: &DMatrix<f64>,
        p: &MarkovProjection,
        _opts: &DeltaOptions,
    ) -> Result<DeltaResult> {
        delta_exact(t, p)
    }
}

impl DeltaStrategy for PairFormulaStrategy {
    fn name(&self) -> &'static str {
        "pair-formula"
    }
    fn description(&self) -> &'static str {
        "exact value through the pair-form supremum (classical block projections)"
    }
    fn compute(
        &self,
        t: &DMatrix<f64>,
        p: &MarkovProjection,
        _opts: &DeltaOptions,
    ) -> Result<DeltaResult> {
        delta_pair_formula(t, p)
    }
}

impl DeltaStrategy for VertexEnumStrategy {
    fn name(&self) -> &'static str {
        "vertex-enum"
    }
    fn description(&self) -> &'static str {
        "exact value by kernel polytope vertex enumeration (classical, small n)"
    }
    fn compute(
        &self,
        t: &DMatrix<f64>,
        p: &MarkovProjection,
        opts: &DeltaOptions,
    ) -> Result<DeltaResult> {
        require_classical(p.space())?;
        delta_vertex_enum(t, p.matrix(), opts)
    }
}

impl DeltaStrategy for BracketStrategy {
    fn name(&self) -> &'static str {
        "bracket"
    }
    fn description(&self) -> &'static str {
        "search lower bound plus certified upper bound (any space)"
    }
    fn compute(
        &self,
        t: &DMatrix<f64>,
        p: &MarkovProjection,
        opts: &DeltaOptions,
    ) -> Result<DeltaResult> {
        delta_bracket(t, p, opts)
    }
}

impl DeltaStrategy for AutoStrategy {
    fn name(&self) -> &'static str {
        "auto"
    }
    fn description(&self) -> &'static str {
        "best available method for the given projection"
    }
    fn compute(
        &self,
        t: &DMatrix<f64>,
        p: &MarkovProjection,
        opts: &DeltaOptions,
    ) -> Result<DeltaResult> {
        delta_auto(t, p, opts)
    }
}

static STRATEGIES: [&dyn DeltaStrategy; 5] = [
    &AutoStrategy,
    &BlockExactStrategy,
    &PairFormulaStrategy,
    &VertexEnumStrategy,
    &BracketStrategy,
];

/// All registered coefficient strategies.
pub fn delta_strategies() -> &'static [&'static dyn DeltaStrategy] {
    &STRATEGIES
}

/// Look up a strategy by its registry name.
pub fn delta_strategy(name: &str) -> Option<&'static dyn DeltaStrategy> {
    STRATEGIES.iter().copied().find(|s| s.name() == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::markov::block_projection;
    use crate::sampling;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rank_one_2() -> MarkovProjection {
        MarkovProjection::rank_one(StateSpace::classical(2).unwrap(), &[0.5, 0.5], 1e-9).unwrap()
    }

    #[test]
    fn exact_trivial_examples() {
        let p = rank_one_2();
        // T = P annihilates the kernel.
        let r = delta_exact(p.matrix(), &p).unwrap();
        assert_eq!(r.value(), 0.0);
        assert!(r.is_exact());
        // T = I preserves kernel norms.
        let r = delta_exact(&DMatrix::identity(2, 2), &p).unwrap();
        assert_eq!(r.value(), 1.0);
        // Two-state chain with columns (0.7, 0.3) and (0.2, 0.8).
        let t = DMatrix::from_row_slice(2, 2, &[0.7, 0.2, 0.3, 0.8]);
        let r = delta_exact(&t, &p).unwrap();
        assert!((r.value() - 0.5).abs() <= 1e-15);
        let w = r.witness.unwrap();
        assert!((w.base_norm() - 1.0).abs() <= 1e-15);
        assert!((p.matrix() * w.coords()).amax() <= 1e-15);
    }

    #[test]
    fn identity_projection_convention() {
        // All-singleton blocks make P = I; the coefficient is 1 by convention.
        let sp = StateSpace::classical(3).unwrap();
        let p = block_projection(
            sp,
            &[vec![0], vec![1], vec![2]],
            &[
                vec![1.0, 0.0, 0.0],
                vec![0.0, 1.0, 0.0],
                vec![0.0, 0.0, 1.0],
            ],
            1e-9,
        )
        .unwrap();
        let t = DMatrix::from_row_slice(3, 3, &[0.5, 0.2, 0.1, 0.3, 0.5, 0.2, 0.2, 0.3, 0.7]);
        assert_eq!(delta_exact(&t, &p).unwrap().value(), 1.0);
        assert_eq!(delta_pair_formula(&t, &p).unwrap().value(), 1.0);
        let r = delta_vertex_enum(&t, p.matrix(), &DeltaOptions::default()).unwrap();
        assert_eq!(r.value(), 1.0);
        assert!(r.witness.is_none());
        assert_eq!(delta_auto(&t, &p, &DeltaOptions::default()).unwrap().value(), 1.0);
    }

    #[test]
    fn zero_projection_gives_operator_norm() {
        // P = 0 is idempotent with full kernel: the coefficient is the
        // induced l1 norm, i.e. the maximum column l1 norm.
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0040);
        for _ in 0..20 {
            let t = DMatrix::from_fn(4, 4, |_, _| rng.random_range(-2.0..2.0));
            let p = DMatrix::zeros(4, 4);
            let r = delta_vertex_enum(&t, &p, &DeltaOptions::default()).unwrap();
            assert!(
                (r.value() - l1_operator_norm(&t)).abs() <= 1e-10,
                "vertex enumeration disagrees with the column norm"
            );
        }
    }

    #[test]
    fn methods_agree_on_random_block_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0041);
        let opts = DeltaOptions::default();
        for _ in 0..100 {
            let n = rng.random_range(2..=6);
            let t = sampling::random_markov(&mut rng, n);
            let p = sampling::random_block_projection(&mut rng, n);
            let exact = delta_exact(t.matrix(), &p).unwrap();
            let pair = delta_pair_formula(t.matrix(), &p).unwrap();
            let vertex = delta_vertex_enum(t.matrix(), p.matrix(), &opts).unwrap();
            assert!((exact.value() - pair.value()).abs() <= 1e-12);
            assert!((exact.value() - vertex.value()).abs() <= 1e-10);
            assert!(exact.value() >= -0.0 && exact.value() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn bracket_sound_against_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0042);
        let opts = DeltaOptions {
            restarts: 8,
            ..DeltaOptions::default()
        };
        for trial in 0..40 {
            let n = rng.random_range(2..=6);
            let t = sampling::random_markov(&mut rng, n);
            let p = sampling::random_coarse_block_projection(&mut rng, n);
            let exact = delta_exact(t.matrix(), &p).unwrap().value();
            let bracket = delta_bracket(t.matrix(), &p, &opts).unwrap();
            assert!(
                bracket.lower <= exact + 1e-12 && exact <= bracket.upper + 1e-12,
                "bracket [{}, {}] misses exact {} in trial {trial}",
                bracket.lower,
                bracket.upper,
                exact
            );
        }
    }

    #[test]
    fn kernel_basis_is_annihilated_and_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0046);
        for _ in 0..50 {
            let n = rng.random_range(2..=8);
            let p = sampling::random_coarse_block_projection(&mut rng, n);
            let basis = kernel_basis(&p);
            assert_eq!(basis.ncols(), p.kernel_dim());
            assert!(
                crate::linalg::max_abs(&(p.matrix() * &basis)) <= 1e-13,
                "basis leaks out of the kernel"
            );
            let gram = basis.transpose() * &basis;
            let eye = DMatrix::<f64>::identity(basis.ncols(), basis.ncols());
            assert!(crate::linalg::max_abs(&(gram - eye)) <= 1e-12);
        }
    }

    #[test]
    fn bracket_of_projection_is_zero() {
        let p = rank_one_2();
        let r = delta_bracket(p.matrix(), &p, &DeltaOptions::default()).unwrap();
        assert!(r.lower.abs() <= 1e-14 && r.upper.abs() <= 1e-14);
    }

    #[test]
    fn bracket_qubit_pauli_channel() {
        // Channel diag(1, -1, 0, 1) against the projection diag(1, 0, 0, 1):
        // the kernel is the s1-s2 plane, the ratio peaks at 1 on the s1 axis.
        let sp = StateSpace::qubit();
        let phi = DMatrix::from_diagonal(&nalgebra::dvector![1.0, -1.0, 0.0, 1.0]);
        let p_op = crate::markov::MarkovOperator::new(
            sp,
            DMatrix::from_diagonal(&nalgebra::dvector![1.0, 0.0, 0.0, 1.0]),
            1e-9,
        )
        .unwrap();
        let p = MarkovProjection::new(p_op, 1e-9).unwrap();
        let r = delta_bracket(&phi, &p, &DeltaOptions::default()).unwrap();
        assert!(r.lower >= 1.0 - 1e-9, "lower bound {} too small", r.lower);
        assert!((r.upper - 1.0).abs() <= 1e-12, "upper bound should cap at 1");
        let w = r.witness.unwrap();
        assert!((w.base_norm() - 1.0).abs() <= 1e-12);

        // Cesaro average diag(1, -1/n, 0, 1) for odd n: the ratio peaks at 1/n.
        for n in [3.0_f64, 5.0] {
            let a_n = DMatrix::from_diagonal(&nalgebra::dvector![1.0, -1.0 / n, 0.0, 1.0]);
            let r = delta_bracket(&a_n, &p, &DeltaOptions::default()).unwrap();
            assert!((r.lower - 1.0 / n).abs() <= 1e-9);
            assert!(r.upper <= 2.0_f64.sqrt() / n + 1e-12);
            assert!(r.lower <= r.upper);
        }
    }

    #[test]
    fn induced_norm_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0043);
        // Classical Markov operators have norm exactly 1.
        for _ in 0..10 {
            let t = sampling::random_markov(&mut rng, 5);
            assert!((induced_norm(t.space(), t.matrix()).unwrap() - 1.0).abs() <= 1e-12);
        }
        // Zero matrix.
        assert_eq!(
            induced_norm(StateSpace::classical(3).unwrap(), &DMatrix::zeros(3, 3)).unwrap(),
            0.0
        );
        // Qubit s1-component extractor: sup over pure states of 2|w1| = 1.
        let mut extractor = DMatrix::zeros(4, 4);
        extractor[(1, 1)] = 1.0;
        let norm = induced_norm(StateSpace::qubit(), &extractor).unwrap();
        assert!((norm - 1.0).abs() <= 1e-8, "extractor norm {norm}");
        // Qubit Markov channels stay below norm 1 + tolerance.
        let phi = DMatrix::from_diagonal(&nalgebra::dvector![1.0, -1.0, 0.0, 1.0]);
        let norm = induced_norm(StateSpace::qubit(), &phi).unwrap();
        assert!((norm - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn contraction_properties_on_random_instances() {
        // Smaller rendition of the theorem property suite; the acceptance
        // tests run the full-size version.
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0044);
        let tol = 1e-10;
        for _ in 0..100 {
            let n = rng.random_range(2..=6);
            let t = sampling::random_markov(&mut rng, n);
            let s = sampling::random_markov(&mut rng, n);
            // Coarse: the chain inequality degenerates under the P = I
            // convention, so the suite draws projections with proper kernels.
            let p = sampling::random_coarse_block_projection(&mut rng, n);
            let d_t = delta_exact(t.matrix(), &p).unwrap().value();
            let d_s = delta_exact(s.matrix(), &p).unwrap().value();
            assert!((0.0..=1.0 + tol).contains(&d_t));
            // Lipschitz chain.
            let diff = t.matrix() - s.matrix();
            let d_diff = delta_exact(&diff, &p).unwrap().value();
            assert!((d_t - d_s).abs() <= d_diff + tol);
            assert!(d_diff <= l1_operator_norm(&diff) + tol);
            // Right bound for commuting H.
            let h = sampling::random_commuting_operator(&mut rng, &p);
            let d_th = delta_exact(&(t.matrix() * &h), &p).unwrap().value();
            assert!(d_th <= d_t * l1_operator_norm(&h) + tol);
            // Annihilation bound for PH = 0.
            let h0 = sampling::random_left_annihilated(&mut rng, &p);
            let th0 = t.matrix() * &h0;
            assert!(l1_operator_norm(&th0) <= d_t * l1_operator_norm(&h0) + tol);
            // Submultiplicativity for commuting Markov S.
            let s_c = sampling::random_commuting_markov(&mut rng, &p);
            let d_sc = delta_exact(s_c.matrix(), &p).unwrap().value();
            let d_prod = delta_exact(&(t.matrix() * s_c.matrix()), &p).unwrap().value();
            assert!(d_prod <= d_t * d_sc + tol);
        }
    }

    #[test]
    fn strategy_registry_lookup() {
        let names: Vec<&str> = delta_strategies().iter().map(|s| s.name()).collect();
        assert_eq!(
            names,
            ["auto", "block-exact", "pair-formula", "vertex-enum", "bracket"]
        );
        assert!(delta_strategy("nonexistent").is_none());
        let p = rank_one_2();
        let t = DMatrix::from_row_slice(2, 2, &[0.7, 0.2, 0.3, 0.8]);
        let via_registry = delta_strategy("block-exact")
            .unwrap()
            .compute(&t, &p, &DeltaOptions::default())
            .unwrap();
        assert_eq!(via_registry.value(), delta_exact(&t, &p).unwrap().value());
    }

    #[test]
    fn auto_dispatch_by_structure() {
        let opts = DeltaOptions::default();
        let t = DMatrix::from_row_slice(2, 2, &[0.7, 0.2, 0.3, 0.8]);
        let p = rank_one_2();
        assert_eq!(delta_auto(&t, &p, &opts).unwrap().method, DeltaMethod::BlockExact);
        // Projection without block metadata dispatches to vertex enumeration.
        let p_raw = MarkovProjection::new(
            crate::markov::MarkovOperator::new(
                StateSpace::classical(2).unwrap(),
                DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]),
                1e-9,
            )
            .unwrap(),
            1e-9,
        )
        .unwrap();
        assert_eq!(
            delta_auto(&t, &p_raw, &opts).unwrap().method,
            DeltaMethod::VertexEnumeration
        );
        // Qubit dispatches to the bracket.
        let sp = StateSpace::qubit();
        let phi = DMatrix::from_diagonal(&nalgebra::dvector![1.0, -1.0, 0.0, 1.0]);
        let p_q = MarkovProjection::new(
            crate::markov::MarkovOperator::new(
                sp,
                DMatrix::from_diagonal(&nalgebra::dvector![1.0, 0.0, 0.0, 1.0]),
                1e-9,
            )
            .unwrap(),
            1e-9,
        )
        .unwrap();
        assert_eq!(delta_auto(&phi, &p_q, &opts).unwrap().method, DeltaMethod::Bracket);
    }

    #[test]
    fn guards_and_errors() {
        let opts = DeltaOptions::default();
        // Dimension guard for the enumeration.
        let n = 11;
        let t = DMatrix::<f64>::identity(n, n);
        let p = DMatrix::<f64>::zeros(n, n);
        assert!(matches!(
            delta_vertex_enum(&t, &p, &opts),
            Err(Error::DimensionGuard { .. })
        ));
        // Non-idempotent matrix rejected.
        let bad = DMatrix::from_row_slice(2, 2, &[0.9, 0.0, 0.0, 0.9]);
        assert!(matches!(
            delta_vertex_enum(&DMatrix::identity(2, 2), &bad, &opts),
            Err(Error::NotIdempotent { .. })
        ));
        // Exact methods refuse qubit spaces.
        let sp = StateSpace::qubit();
        let p_q = MarkovProjection::new(
            crate::markov::MarkovOperator::new(
                sp,
                DMatrix::from_diagonal(&nalgebra::dvector![1.0, 0.0, 0.0, 1.0]),
                1e-9,
            )
            .unwrap(),
            1e-9,
        )
        .unwrap();
        assert!(delta_exact(&DMatrix::identity(4, 4), &p_q).is_err());
    }

    #[test]
    fn witnesses_achieve_reported_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0045);
        for _ in 0..40 {
            let n = rng.random_range(2..=6);
            let t = sampling::random_markov(&mut rng, n);
            let p = sampling::random_coarse_block_projection(&mut rng, n);
            let r = delta_exact(t.matrix(), &p).unwrap();
            let w = r.witness.as_ref().expect("coarse projections have kernel pairs");
            assert!((w.base_norm() - 1.0).abs() <= 1e-12);
            let x = w.coords();
            assert!((p.matrix() * x).amax() <= 1e-12, "witness not in kernel");
            let achieved = (t.matrix() * x).abs().sum();
            assert!((achieved - r.value()).abs() <= 1e-12);
        }
    }
}
