//! Augmented regressor `Y(x,t) = [Y_h(x,t) | I_n]`.
//!
//! Appending the identity block folds the exogenous disturbance into the
//! parameter vector: `Y(x,t)·θ(t) = Y_h(x,t)·θ_f(t) + d(t)` exactly.

use nalgebra::DMatrix;
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::model::{ReferenceTrajectory, Scenario, SystemModel};
use crate::sweep;

/// Dense `n×(n+m)` regressor whose right block is the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedRegressor {
    pub matrix: DMatrix<f64>,
    pub n: usize,
    pub m: usize,
}

impl AugmentedRegressor {
    /// Spectral norm (largest singular value).
    pub fn spectral_norm(&self) -> f64 {
        spectral_norm(&self.matrix)
    }
}

/// Largest singular value via the symmetric eigenproblem of the smaller Gram
/// matrix.
pub fn spectral_norm(a: &DMatrix<f64>) -> f64 {
    let gram = if a.nrows() <= a.ncols() { a * a.transpose() } else { a.transpose() * a };
    let eig = gram.symmetric_eigen();
    eig.eigenvalues.iter().fold(0.0f64, |acc, &v| acc.max(v)).max(0.0).sqrt()
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn symmetric_eigen_range(a: &DMatrix<f64>) -> (f64, f64) {
    let eig = a.clone().symmetric_eigen();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in eig.eigenvalues.iter() {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

fn assemble(model: &SystemModel, x: &DVector<f64>, t: f64) -> DMatrix<f64> {
    let (n, m) = (model.n, model.m);
    let yh = model.yh(x, t);
    let mut y = DMatrix::zeros(n, n + m);
    y.view_mut((0, 0), (n, m)).copy_from(&yh);
    y.view_mut((0, m), (n, n)).fill_with_identity();
    y
}

/// Evaluates the augmented regressor at state `x` and time `t`.
pub fn eval_y(model: &SystemModel, x: &DVector<f64>, t: f64) -> Result<AugmentedRegressor> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("state passed to regressor evaluation"));
    }
    if x.len() != model.n {
        return Err(Error::DimensionMismatch {
            context: "regressor state",
            expected: model.n,
            got: x.len(),
        });
    }
    let matrix = assemble(model, x, t);
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("regressor entries"));
    }
    Ok(AugmentedRegressor { matrix, n: model.n, m: model.m })
}

/// Augmented regressor evaluated along the reference, `Y_d(t) = Y(x_d(t), t)`.
pub fn eval_yd(
    model: &SystemModel,
    reference: &ReferenceTrajectory,
    t: f64,
) -> Result<AugmentedRegressor> {
    eval_y(model, &reference.xd(t), t)
}

/// Matrix-only fast path for sweeps and integrator stages (inputs are known
/// finite there).
pub(crate) fn yd_matrix(model: &SystemModel, reference: &ReferenceTrajectory, t: f64) -> DMatrix<f64> {
    assemble(model, &reference.xd(t), t)
}

/// Matrix-only fast path for the augmented regressor at an arbitrary state.
pub(crate) fn y_matrix(model: &SystemModel, x: &DVector<f64>, t: f64) -> DMatrix<f64> {
    assemble(model, x, t)
}

/// Supremum of the spectral norm of `Y_d` over the horizon, sampled at
/// `dt/10` resolution and inflated by `1 + 1e-6`.
pub fn yd_sup_norm(scenario: &Scenario) -> f64 {
    let t_end = if scenario.t_end > 0.0 { scenario.t_end } else { 1.0 };
    let samples = (t_end / (scenario.dt / 10.0)).ceil() as usize;
    let model = &scenario.model;
    let reference = &scenario.reference;
    let sup =
        sweep::grid_sup(0.0, t_end, samples, |t| spectral_norm(&yd_matrix(model, reference, t)));
    sup * (1.0 + 1e-6)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_scenario;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn s1_regressor_direct_substitution() {
        let sc = builtin_scenario("S1_scalar").unwrap();
        let y = eval_y(&sc.model, &DVector::from_vec(vec![2.0]), 0.0).unwrap();
        assert_eq!(y.matrix.as_slice(), &[2.0, 1.0]); // column-major 1x2
    }

    #[test]
    fn s2_regressor_hand_evaluation() {
        let sc = builtin_scenario("S2_twostate").unwrap();
        let y = eval_y(&sc.model, &DVector::from_vec(vec![1.0, 1.0]), 0.0).unwrap();
        let expected = DMatrix::from_row_slice(
            2,
            5,
            &[1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0f64.sin(), 0.0, 1.0],
        );
        assert_eq!(y.matrix, expected);
    }

    #[test]
    fn identity_block_is_exact() {
        let sc = builtin_scenario("S2_twostate").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x = DVector::from_fn(2, |_, _| rng.random_range(-4.0..4.0));
            let t: f64 = rng.random_range(0.0..40.0);
            let y = eval_y(&sc.model, &x, t).unwrap();
            let block = y.matrix.view((0, 3), (2, 2)).clone_owned();
            assert_eq!(block, DMatrix::identity(2, 2));
        }
    }

    #[test]
    fn reconstruction_identity_random_draws() {
        // Y(x,t)·θ(t) must reproduce Y_h·θ_f + d to rounding
        for name in ["S1_scalar", "S2_twostate", "S3_constant_param", "S4_disturbance_only"] {
            let sc = builtin_scenario(name).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for _ in 0..1000 {
                let x = DVector::from_fn(sc.model.n, |_, _| rng.random_range(-5.0..5.0));
                let t: f64 = rng.random_range(0.0..40.0);
                let y = eval_y(&sc.model, &x, t).unwrap();
                let lhs = &y.matrix * sc.model.eval_theta(t);
                let rhs = sc.model.yh(&x, t) * sc.model.theta_f(t) + sc.model.d(t);
                assert!((lhs - rhs).norm() <= 1e-12, "{name} reconstruction failed");
            }
        }
    }

    #[test]
    fn desired_regressor_matches_state_regressor_bitwise() {
        let sc = builtin_scenario("S2_twostate").unwrap();
        for i in 0..500 {
            let t = 0.08 * i as f64;
            let yd = eval_yd(&sc.model, &sc.reference, t).unwrap();
            let y = eval_y(&sc.model, &sc.reference.xd(t), t).unwrap();
            assert_eq!(yd.matrix, y.matrix);
        }
    }

    #[test]
    fn s1_desired_regressor_at_zero() {
        let sc = builtin_scenario("S1_scalar").unwrap();
        let yd = eval_yd(&sc.model, &sc.reference, 0.0).unwrap();
        assert_eq!(yd.matrix.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn s1_yd_sup_norm_is_sqrt_two() {
        // analytic maximum of ‖[sin t, 1]‖₂; dense-sampling oracle agrees
        let sc = builtin_scenario("S1_scalar").unwrap();
        let sup = yd_sup_norm(&sc);
        assert_relative_eq!(sup, 2.0f64.sqrt(), max_relative = 1e-5);
        let oracle = crate::sweep::grid_sup_seq(0.0, 7.0, 100_000, |t| {
            (1.0 + t.sin().powi(2)).sqrt()
        });
        assert_relative_eq!(oracle, 2.0f64.sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn non_finite_state_is_rejected() {
        let sc = builtin_scenario("S1_scalar").unwrap();
        let err = eval_y(&sc.model, &DVector::from_vec(vec![f64::NAN]), 0.0);
        assert!(matches!(err, Err(Error::NonFinite(_))));
    }

    #[test]
    fn spectral_norm_against_known_values() {
        let a = DMatrix::from_row_slice(1, 2, &[3.0, 4.0]);
        assert_relative_eq!(spectral_norm(&a), 5.0, epsilon = 1e-12);
        let i = DMatrix::<f64>::identity(3, 3);
        assert_relative_eq!(spectral_norm(&i), 1.0, epsilon = 1e-12);
    }
}
