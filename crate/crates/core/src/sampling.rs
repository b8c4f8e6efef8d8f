//! Seeded random generators for operators, projections, and semigroups.
//!
//! These are used heavily by the test suites (oracle agreement, certificate
//! probes) and by the command-line front end's self-checks. Everything is
//! driven by a caller-supplied RNG so runs are reproducible.

use crate::markov::{block_projection, MarkovOperator, MarkovProjection};
use crate::semigroup::Semigroup;
use crate::space::StateSpace;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Random column-stochastic operator on `n` classical states.
pub fn random_markov<R: Rng>(rng: &mut R, n: usize) -> MarkovOperator {
    let space = StateSpace::classical(n).expect("n >= 1");
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut col: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let total: f64 = col.iter().sum();
        for v in &mut col {
            *v /= total;
        }
        m.set_column(j, &DVector::from_column_slice(&col));
    }
    MarkovOperator::new(space, m, 1e-9).expect("normalized columns are stochastic")
}

/// Random rate matrix (off-diagonal entries in `[0, scale)`, columns summing
/// to zero) on `n` states.
pub fn random_rate_matrix<R: Rng>(rng: &mut R, n: usize, scale: f64) -> DMatrix<f64> {
    let mut a = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut sum = 0.0;
        for i in 0..n {
            if i != j {
                let v = rng.random_range(0.0..scale);
                a[(i, j)] = v;
                sum += v;
            }
        }
        a[(j, j)] = -sum;
    }
    a
}

/// Random partition of `0..n` into at most `max_blocks` nonempty blocks.
fn random_partition<R: Rng>(rng: &mut R, n: usize, max_blocks: usize) -> Vec<Vec<usize>> {
    let count = rng.random_range(1..=max_blocks.min(n));
    // Ensure every block is nonempty: assign one index per block first.
    let mut indices: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        indices.swap(i, j);
    }
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); count];
    for (pos, &idx) in indices.iter().enumerate() {
        if pos < count {
            blocks[pos].push(idx);
        } else {
            let b = rng.random_range(0..count);
            blocks[b].push(idx);
        }
    }
    for b in &mut blocks {
        b.sort_unstable();
    }
    blocks
}

/// Strictly positive probability weight supported on `block`.
fn random_weight<R: Rng>(rng: &mut R, n: usize, block: &[usize]) -> Vec<f64> {
    let mut w = vec![0.0; n];
    let mut total = 0.0;
    for &i in block {
        let v = rng.random_range(0.05..1.0);
        w[i] = v;
        total += v;
    }
    for v in &mut w {
        *v /= total;
    }
    w
}

/// Random classical block projection on `n` states (random partition with
/// strictly positive in-block weights).
pub fn random_block_projection<R: Rng>(rng: &mut R, n: usize) -> MarkovProjection {
    let blocks = random_partition(rng, n, n);
    let weights: Vec<Vec<f64>> = blocks.iter().map(|b| random_weight(rng, n, b)).collect();
    block_projection(StateSpace::Classical { n }, &blocks, &weights, 1e-9)
        .expect("sampled partition and weights are consistent")
}

/// Random block projection with a nontrivial kernel (at least one block of
/// size two or more).
pub fn random_coarse_block_projection<R: Rng>(rng: &mut R, n: usize) -> MarkovProjection {
    assert!(n >= 2, "need at least two states for a nontrivial kernel");
    loop {
        let p = random_block_projection(rng, n);
        if p.kernel_dim() > 0 {
            return p;
        }
    }
}

/// Rate matrix supported on `block` that is reversible with respect to the
/// strictly positive weight `q` (detailed balance a_ik q_k = a_ki q_i), so
/// that `q` is stationary for the block dynamics.
fn reversible_block_rate<R: Rng>(
    rng: &mut R,
    n: usize,
    block: &[usize],
    q: &DVector<f64>,
    scale: f64,
) -> DMatrix<f64> {
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (bi, &i) in block.iter().enumerate() {
        for &k in block.iter().skip(bi + 1) {
            let w = rng.random_range(0.1..scale);
            a[(i, k)] = w * q[i];
            a[(k, i)] = w * q[k];
        }
    }
    for &k in block {
        let mut col_sum = 0.0;
        for &i in block {
            if i != k {
                col_sum += a[(i, k)];
            }
        }
        a[(k, k)] = -col_sum;
    }
    a
}

/// Random pair (S, P): a block projection P and a continuous Markov
/// semigroup whose generator A satisfies `A P = P A = 0`, so that
/// `T_t P = P T_t = P` for every t. The generator is block diagonal with
/// each block reversible with respect to the block weight.
pub fn random_invariant_pair<R: Rng>(rng: &mut R, n: usize) -> (Semigroup, MarkovProjection) {
    assert!(n >= 2, "need at least two states");
    let blocks = loop {
        let candidate = random_partition(rng, n, (n / 2).max(1));
        if candidate.iter().any(|b| b.len() >= 2) {
            break candidate;
        }
    };
    let weights: Vec<Vec<f64>> = blocks.iter().map(|b| random_weight(rng, n, b)).collect();
    let space = StateSpace::Classical { n };
    let p = block_projection(space, &blocks, &weights, 1e-9)
        .expect("sampled partition and weights are consistent");
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (j, block) in blocks.iter().enumerate() {
        let q = &p.block_structure().unwrap().weights[j];
        a += reversible_block_rate(rng, n, block, q, 2.0);
    }
    let s = Semigroup::continuous(space, a, 1e-9)
        .expect("block-reversible construction yields a rate matrix")
        .with_commuting_projection(&p, 1e-8)
        .expect("block-diagonal generator commutes with its block projection");
    (s, p)
}

/// Random Markov operator commuting with the block projection `p` and fixing
/// its weights (`Q P = P Q = P`): a block-diagonal exponential of a
/// reversible intra-block rate matrix.
pub fn random_commuting_markov<R: Rng>(rng: &mut R, p: &MarkovProjection) -> MarkovOperator {
    let structure = p
        .block_structure()
        .expect("commuting sampler needs a block projection");
    let n = p.space().dim();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for (j, block) in structure.blocks.iter().enumerate() {
        a += reversible_block_rate(rng, n, block, &structure.weights[j], 2.0);
    }
    let t = rng.random_range(0.2..1.5);
    MarkovOperator::new(p.space(), crate::linalg::expm(&(a * t)), 1e-8)
        .expect("exponential of a rate matrix is Markov")
}

/// Random bounded operator commuting with `p` (generally not Markov):
/// `a I + b P + c (I - P) R (I - P)` for a random dense `R`.
pub fn random_commuting_operator<R: Rng>(rng: &mut R, p: &MarkovProjection) -> DMatrix<f64> {
    let n = p.space().dim();
    let ident = DMatrix::<f64>::identity(n, n);
    let complement = &ident - p.matrix();
    let r = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let (a, b, c) = (
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    );
    a * &ident + b * p.matrix() + c * (&complement * r * &complement)
}

/// Random bounded operator annihilated by `p` on the left (`P H = 0`):
/// `(I - P) R`.
pub fn random_left_annihilated<R: Rng>(rng: &mut R, p: &MarkovProjection) -> DMatrix<f64> {
    let n = p.space().dim();
    let ident = DMatrix::<f64>::identity(n, n);
    let r = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    (&ident - p.matrix()) * r
}

/// Fixed reversible three-state rate matrix whose spectrum is exactly
/// `{0, -1, -3}` and whose contraction coefficient genuinely mixes both
/// decay rates (it is not a single exponential in `t`). Returns the
/// generator together with its stationary distribution. Useful as a
/// reference chain for spectral diagnostics.
pub fn two_rate_chain() -> (DMatrix<f64>, Vec<f64>) {
    // Reversible skeleton a_ik = w_ik * pi_i with a strongly non-uniform
    // stationary law; the skew eigenbasis is what makes the slow mode's
    // coefficient in the contraction coefficient exceed 1.
    let pi = [0.8, 0.15, 0.05];
    let w = [[0.0, 0.5, 0.25], [0.5, 0.0, 1.0], [0.25, 1.0, 0.0]];
    let mut a0 = DMatrix::<f64>::zeros(3, 3);
    for i in 0..3 {
        for k in 0..3 {
            if i != k {
                a0[(i, k)] = w[i][k] * pi[i];
            }
        }
    }
    for k in 0..3 {
        let col_sum: f64 = (0..3).filter(|&i| i != k).map(|i| a0[(i, k)]).sum();
        a0[(k, k)] = -col_sum;
    }
    // The two nonzero eigenvalues -l1, -l2 solve x^2 + s x + e2 = 0 where
    // s = -trace and e2 is the sum of principal 2x2 minors (the third
    // eigenvalue is 0, so these are the elementary symmetric functions of
    // the remaining pair).
    let s = -a0.trace();
    let mut e2 = 0.0;
    for i in 0..3 {
        for j in (i + 1)..3 {
            e2 += a0[(i, i)] * a0[(j, j)] - a0[(i, j)] * a0[(j, i)];
        }
    }
    let disc = (s * s - 4.0 * e2).sqrt();
    let l1 = (s - disc) / 2.0;
    let l2 = (s + disc) / 2.0;
    // Remap the spectrum onto (0, -1, -3): A = c1 A0 + c2 A0^2 shares the
    // eigenbasis of A0, so it suffices to solve the 2x2 system sending
    // -l1 -> -1 and -l2 -> -3.
    let det = -l1 * l2 * l2 + l2 * l1 * l1;
    let c1 = (-(l2 * l2) + 3.0 * (l1 * l1)) / det;
    let c2 = (3.0 * l1 - l2) / det;
    let a = c1 * &a0 + c2 * (&a0 * &a0);
    (a, pi.to_vec())
}
