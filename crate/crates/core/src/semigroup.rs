//! One-parameter Markov semigroups: continuous (generated by a rate matrix
//! or Bloch generator) and discrete (powers of a fixed Markov operator).
//!
//! Continuous evaluation uses the scaling-and-squaring matrix exponential;
//! the Cesaro average A_t = (1/t) integral_0^t T_s ds is computed through
//! the block-augmented exponential (see [`crate::linalg::expm_with_integral`]),
//! not by quadrature. Discrete Cesaro averages are A_n = (1/n) sum_{k=1}^n T^k.

use crate::error::{Error, Result};
use crate::linalg::{expm, expm_with_integral, max_abs};
use crate::markov::{MarkovOperator, MarkovProjection, Validation};
use crate::space::StateSpace;
use nalgebra::{DMatrix, DVector};

/// Discrete times must be integers up to this slack.
const INTEGER_SLACK: f64 = 1e-12;

/// Kind of time parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemigroupKind {
    /// `T_t = exp(t A)` for a generator A, t >= 0 real.
    Continuous,
    /// `T_n = T^n` for a fixed Markov step operator, n >= 0 integer.
    Discrete,
}

#[derive(Debug, Clone, PartialEq)]
enum Data {
    Generator(DMatrix<f64>),
    Step(MarkovOperator),
}

/// A one-parameter Markov semigroup.
#[derive(Debug, Clone, PartialEq)]
pub struct Semigroup {
    space: StateSpace,
    data: Data,
    commuting: Option<MarkovProjection>,
}

/// Check that `matrix` generates a Markov semigroup on `space`.
///
/// Classical: off-diagonal entries >= -tol and column sums within tol of 0
/// (a rate matrix in the column convention). Qubit: the first Bloch row must
/// vanish (trace conservation); positivity of `exp(tA)` is then checked on
/// sampled pure states for a few times, which is heuristic.
pub fn validate_generator(
    space: StateSpace,
    matrix: &DMatrix<f64>,
    tol: f64,
) -> Result<Validation> {
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
                    if i != j && v < -tol {
                        return Err(Error::NotGenerator(format!(
                            "negative off-diagonal rate {v:.3e} at ({i}, {j})"
                        )));
                    }
                    sum += v;
                }
                let scale = 1.0 + matrix.column(j).amax();
                if sum.abs() > tol.max(1e-12) * scale * n as f64 {
                    return Err(Error::NotGenerator(format!(
                        "column {j} sums to {sum:.3e} instead of 0"
                    )));
                }
            }
            Ok(Validation::Exact)
        }
        StateSpace::Qubit => {
            for j in 0..4 {
                if matrix[(0, j)].abs() > tol {
                    return Err(Error::NotGenerator(
                        "first Bloch row must vanish to conserve the trace".into(),
                    ));
                }
            }
            for t in [0.1, 1.0] {
                let tt = expm(&(matrix * t));
                for u in crate::markov::fibonacci_sphere(256) {
                    let x = DVector::from_column_slice(&[0.5, u[0] / 2.0, u[1] / 2.0, u[2] / 2.0]);
                    let y = &tt * x;
                    if !space.is_positive_raw(&y, 1e-7) {
                        return Err(Error::NotGenerator(format!(
                            "exp({t} A) maps a pure state out of the cone"
                        )));
                    }
                }
            }
            Ok(Validation::Heuristic)
        }
    }
}

impl Semigroup {
    /// Continuous semigroup `t -> exp(t A)`; validates the generator.
    pub fn continuous(space: StateSpace, generator: DMatrix<f64>, tol: f64) -> Result<Self> {
        validate_generator(space, &generator, tol)?;
        Ok(Semigroup {
            space,
            data: Data::Generator(generator),
            commuting: None,
        })
    }

    /// Discrete semigroup `n -> T^n` of a fixed Markov step.
    pub fn discrete(step: MarkovOperator) -> Self {
        Semigroup {
            space: step.space(),
            data: Data::Step(step),
            commuting: None,
        }
    }

    /// Attach a Markov projection after verifying that it commutes with the
    /// semigroup (with the generator, or with the step operator).
    pub fn with_commuting_projection(mut self, p: &MarkovProjection, tol: f64) -> Result<Self> {
        if p.space() != self.space {
            return Err(Error::SpaceMismatch(
                "projection lives on a different space than the semigroup".into(),
            ));
        }
        let defect = match &self.data {
            Data::Generator(a) => max_abs(&(a * p.matrix() - p.matrix() * a)),
            Data::Step(t) => max_abs(&(t.matrix() * p.matrix() - p.matrix() * t.matrix())),
        };
        if defect > tol {
            return Err(Error::Precondition(format!(
                "projection does not commute with the semigroup (defect {defect:.3e})"
            )));
        }
        self.commuting = Some(p.clone());
        Ok(self)
    }

    /// State space of the semigroup.
    pub fn space(&self) -> StateSpace {
        self.space
    }

    /// Continuous or discrete.
    pub fn kind(&self) -> SemigroupKind {
        match self.data {
            Data::Generator(_) => SemigroupKind::Continuous,
            Data::Step(_) => SemigroupKind::Discrete,
        }
    }

    /// Generator matrix of a continuous semigroup.
    pub fn generator(&self) -> Result<&DMatrix<f64>> {
        match &self.data {
            Data::Generator(a) => Ok(a),
            Data::Step(_) => Err(Error::WrongKind(
                "discrete semigroups have no generator".into(),
            )),
        }
    }

    /// Step operator of a discrete semigroup.
    pub fn step(&self) -> Result<&MarkovOperator> {
        match &self.data {
            Data::Step(t) => Ok(t),
            Data::Generator(_) => Err(Error::WrongKind(
                "continuous semigroups have no step operator".into(),
            )),
        }
    }

    /// Attached commuting projection, if any.
    pub fn commuting_projection(&self) -> Option<&MarkovProjection> {
        self.commuting.as_ref()
    }

    /// Evaluate `T_t`. Continuous: any t >= 0. Discrete: t must be a
    /// nonnegative integer (within 1e-12).
    pub fn evaluate(&self, t: f64) -> Result<MarkovOperator> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::InvalidParameter {
                name: "t",
                reason: format!("time must be finite and nonnegative, got {t}"),
            });
        }
        match &self.data {
            Data::Generator(a) => Ok(MarkovOperator::from_matrix_unchecked(
                self.space,
                expm(&(a * t)),
            )),
            Data::Step(step) => {
                let n = t.round();
                if (t - n).abs() > INTEGER_SLACK {
                    return Err(Error::InvalidParameter {
                        name: "t",
                        reason: format!("discrete semigroups need integer times, got {t}"),
                    });
                }
                self.power(step, n as u64)
            }
        }
    }

    /// Evaluate `T_n` at an integer time (both kinds).
    pub fn evaluate_steps(&self, n: u64) -> Result<MarkovOperator> {
        self.evaluate(n as f64)
    }

    fn power(&self, step: &MarkovOperator, mut n: u64) -> Result<MarkovOperator> {
        let d = self.space.dim();
        let mut result = DMatrix::<f64>::identity(d, d);
        let mut base = step.matrix().clone();
        while n > 0 {
            if n & 1 == 1 {
                result = &result * &base;
            }
            base = &base * &base;
            n >>= 1;
        }
        Ok(MarkovOperator::from_matrix_unchecked(self.space, result))
    }

    /// Cesaro average `A_t`. Continuous: `(1/t) integral_0^t T_s ds` for
    /// t > 0 via the augmented exponential. Discrete: `(1/n) sum_{k=1}^n T^k`
    /// for integer n >= 1.
    pub fn cesaro(&self, t: f64) -> Result<MarkovOperator> {
        if !t.is_finite() || t <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "t",
                reason: format!("Cesaro averages need t > 0, got {t}"),
            });
        }
        match &self.data {
            Data::Generator(a) => {
                let (_, integral) = expm_with_integral(a, t);
                Ok(MarkovOperator::from_matrix_unchecked(
                    self.space,
                    integral / t,
                ))
            }
            Data::Step(step) => {
                let n = t.round();
                if (t - n).abs() > INTEGER_SLACK || n < 1.0 {
                    return Err(Error::InvalidParameter {
                        name: "t",
                        reason: format!(
                            "discrete Cesaro averages need integer t >= 1, got {t}"
                        ),
                    });
                }
                let n = n as u64;
                let mut power = step.matrix().clone();
                let mut sum = power.clone();
                for _ in 2..=n {
                    power = &power * step.matrix();
                    sum += &power;
                }
                Ok(MarkovOperator::from_matrix_unchecked(
                    self.space,
                    sum / n as f64,
                ))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use crate::space::StateSpace;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_state_chain() -> Semigroup {
        let space = StateSpace::classical(2).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]);
        Semigroup::continuous(space, a, 1e-9).unwrap()
    }

    #[test]
    fn validate_generator_examples() {
        let sp = StateSpace::classical(2).unwrap();
        assert!(validate_generator(
            sp,
            &DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 1.0, -1.0]),
            1e-9
        )
        .is_ok());
        // Column sums nonzero.
        assert!(validate_generator(
            sp,
            &DMatrix::from_row_slice(2, 2, &[-1.0, 1.0, 0.5, -1.0]),
            1e-9
        )
        .is_err());
        // Negative off-diagonal rate.
        assert!(validate_generator(
            sp,
            &DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]),
            1e-9
        )
        .is_err());
    }

    #[test]
    fn projection_deficit_generator_is_valid_and_commutes() {
        // lambda (P - I) is a rate matrix commuting with P.
        let sp = StateSpace::classical(3).unwrap();
        let p = crate::markov::block_projection(
            sp,
            &[vec![0, 1], vec![2]],
            &[vec![0.5, 0.5, 0.0], vec![0.0, 0.0, 1.0]],
            1e-9,
        )
        .unwrap();
        let lambda = 0.7;
        let a = (p.matrix() - DMatrix::<f64>::identity(3, 3)) * lambda;
        assert!(validate_generator(sp, &a, 1e-9).is_ok());
        let s = Semigroup::continuous(sp, a, 1e-9)
            .unwrap()
            .with_commuting_projection(&p, 1e-12)
            .unwrap();
        assert!(s.commuting_projection().is_some());
    }

    #[test]
    fn evaluate_two_state_closed_form() {
        // exp(tA) = P + e^{-2t}(I - P): entries ((1 +/- e^{-2t})/2).
        let s = two_state_chain();
        let t1 = s.evaluate(1.0).unwrap();
        let c = (-2.0_f64).exp();
        let expected = DMatrix::from_row_slice(
            2,
            2,
            &[
                (1.0 + c) / 2.0,
                (1.0 - c) / 2.0,
                (1.0 - c) / 2.0,
                (1.0 + c) / 2.0,
            ],
        );
        assert!(max_abs(&(t1.matrix() - &expected)) <= 1e-13);
        // t = 0 gives the identity exactly.
        let t0 = s.evaluate(0.0).unwrap();
        assert_eq!(t0.matrix(), &DMatrix::identity(2, 2));
    }

    #[test]
    fn discrete_powers_by_binary_exponentiation() {
        let sp = StateSpace::classical(2).unwrap();
        let swap = MarkovOperator::new(
            sp,
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
            1e-9,
        )
        .unwrap();
        let s = Semigroup::discrete(swap.clone());
        assert_eq!(s.evaluate(0.0).unwrap().matrix(), &DMatrix::identity(2, 2));
        assert_eq!(s.evaluate(3.0).unwrap().matrix(), swap.matrix());
        assert_eq!(s.evaluate(8.0).unwrap().matrix(), &DMatrix::identity(2, 2));
        assert!(s.evaluate(1.5).is_err());
        assert!(s.evaluate(-1.0).is_err());
    }

    #[test]
    fn discrete_cesaro_of_swap() {
        let sp = StateSpace::classical(2).unwrap();
        let swap = MarkovOperator::new(
            sp,
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]),
            1e-9,
        )
        .unwrap();
        let s = Semigroup::discrete(swap);
        // (T + T^2)/2 = (swap + I)/2.
        let a2 = s.cesaro(2.0).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        assert!(max_abs(&(a2.matrix() - &expected)) <= 1e-15);
        assert!(s.cesaro(0.0).is_err());
        assert!(s.cesaro(2.5).is_err());
    }

    #[test]
    fn continuous_cesaro_two_state_closed_form() {
        // A_t = P + (1 - e^{-2t})/(2t) (I - P) on the two-state chain.
        let s = two_state_chain();
        for t in [0.5, 1.0, 5.0] {
            let a_t = s.cesaro(t).unwrap();
            let c = (1.0 - (-2.0 * t).exp()) / (2.0 * t);
            let expected = DMatrix::from_row_slice(
                2,
                2,
                &[
                    0.5 + 0.5 * c,
                    0.5 - 0.5 * c,
                    0.5 - 0.5 * c,
                    0.5 + 0.5 * c,
                ],
            );
            assert!(
                max_abs(&(a_t.matrix() - &expected)) <= 1e-12,
                "Cesaro mismatch at t={t}"
            );
        }
    }

    #[test]
    fn continuous_cesaro_matches_simpson_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0030);
        for _ in 0..3 {
            let a = sampling::random_rate_matrix(&mut rng, 4, 1.5);
            let s = Semigroup::continuous(StateSpace::classical(4).unwrap(), a.clone(), 1e-9)
                .unwrap();
            for t in [0.5, 1.0, 5.0] {
                // Composite Simpson with 2^12 panels as an independent oracle.
                let panels = 1 << 12;
                let h = t / panels as f64;
                let mut acc = DMatrix::<f64>::zeros(4, 4);
                for k in 0..panels {
                    let left = k as f64 * h;
                    let f0 = expm(&(&a * left));
                    let fm = expm(&(&a * (left + 0.5 * h)));
                    let f1 = expm(&(&a * (left + h)));
                    acc += (f0 + fm * 4.0 + f1) * (h / 6.0);
                }
                acc /= t;
                let fast = s.cesaro(t).unwrap();
                assert!(
                    max_abs(&(fast.matrix() - &acc)) <= 1e-8,
                    "quadrature disagreement at t={t}"
                );
            }
        }
    }

    #[test]
    fn cesaro_tends_to_identity_at_small_times() {
        let s = two_state_chain();
        let a = s.cesaro(1e-6).unwrap();
        assert!(max_abs(&(a.matrix() - DMatrix::identity(2, 2))) <= 1e-5);
    }

    #[test]
    fn semigroup_law_on_random_chains() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0031);
        for _ in 0..10 {
            let n = rng.random_range(2..=6);
            let a = sampling::random_rate_matrix(&mut rng, n, 2.0);
            let s =
                Semigroup::continuous(StateSpace::classical(n).unwrap(), a, 1e-9).unwrap();
            for _ in 0..10 {
                let t = rng.random_range(0.0..5.0);
                let u = rng.random_range(0.0..5.0);
                let lhs = s.evaluate(t + u).unwrap();
                let rhs = s.evaluate(t).unwrap().compose(&s.evaluate(u).unwrap()).unwrap();
                assert!(
                    max_abs(&(lhs.matrix() - rhs.matrix())) <= 1e-10,
                    "semigroup law violated at t={t}, u={u}"
                );
            }
        }
    }

    #[test]
    fn evaluations_are_markov() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0032);
        for _ in 0..20 {
            let n = rng.random_range(2..=6);
            let a = sampling::random_rate_matrix(&mut rng, n, 2.0);
            let s =
                Semigroup::continuous(StateSpace::classical(n).unwrap(), a, 1e-9).unwrap();
            for t in [0.3, 1.7, 12.0] {
                let tt = s.evaluate(t).unwrap();
                assert!(crate::markov::validate_markov(tt.space(), tt.matrix(), 1e-9).is_ok());
                let at = s.cesaro(t).unwrap();
                assert!(crate::markov::validate_markov(at.space(), at.matrix(), 1e-9).is_ok());
            }
        }
    }

    #[test]
    fn qubit_generator_validation() {
        let sp = StateSpace::qubit();
        // Dephasing toward the s3 axis: w1, w2 decay at rate 1.
        let a = DMatrix::from_diagonal(&nalgebra::dvector![0.0, -1.0, -1.0, 0.0]);
        assert_eq!(
            validate_generator(sp, &a, 1e-9).unwrap(),
            Validation::Heuristic
        );
        // Trace not conserved.
        let mut bad = a.clone();
        bad[(0, 0)] = 0.5;
        assert!(validate_generator(sp, &bad, 1e-9).is_err());
        // Bloch expansion is not positive.
        let grow = DMatrix::from_diagonal(&nalgebra::dvector![0.0, 1.0, 0.0, 0.0]);
        assert!(validate_generator(sp, &grow, 1e-9).is_err());
    }
}
