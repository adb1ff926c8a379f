//! Continuous adaptive tracking controller.
//!
//! The control input is
//!
//! ```text
//! u = -Y_d θ̂ - α e + x_d' + μ
//! ```
//!
//! and the estimate update is a projection of
//!
//! ```text
//! Λ0 = Γ Y_dᵀ (Y_d Γ Y_dᵀ)⁻¹ β sgn(e)
//! ```
//!
//! onto the ball `‖θ̂‖ ≤ θ̄`: on the boundary with `Λ0` pointing outward the
//! update switches to its tangential component `Λ1`, and the auxiliary term's
//! derivative `μ'` picks up `-Y_d(Λ0 - Λ1)` so the closed-loop error dynamics
//! are identical on both switch branches. The projection boundary is the
//! level set of `f(θ) = θᵀθ - θ̄²`, the simplest continuously differentiable
//! convex function that is negative inside the ball and zero on it; its
//! gradient is `2θ`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regressor::{symmetric_eigen_range, AugmentedRegressor};

/// Relative thickening of the projection boundary test. Floating-point
/// trajectories never land on the sphere exactly; the switch fires once the
/// estimate is within one part in 1e12 of the radius.
pub const BOUNDARY_THICKNESS: f64 = 1e-12;

/// Tolerance on the projection guarantee `‖θ̂‖ ≤ θ̄ (1 + EPS_PROJ)`.
pub const EPS_PROJ: f64 = 1e-9;

/// Condition-number ceiling for the `Y_d Γ Y_dᵀ` solve.
pub const MAX_CONDITION: f64 = 1e12;

/// Controller gains. `gamma1`/`gamma2` are the blocks of the block-diagonal
/// adaptation gain; the off-diagonal blocks are structurally zero.
#[derive(Clone, Debug)]
pub struct GainSet {
    /// Filtered-error gain (`r = e' + α e`).
    pub alpha: f64,
    /// Feedback gain inside the auxiliary term (`μ' = -K r + ...`).
    pub k: f64,
    /// Signum gain of the adaptation law.
    pub beta: f64,
    /// Adaptation gain block acting on the plant parameters (`m×m`).
    pub gamma1: DMatrix<f64>,
    /// Adaptation gain block acting on the disturbance estimate (`n×n`).
    pub gamma2: DMatrix<f64>,
    /// Projection-ball radius.
    pub theta_bar: f64,
}

impl GainSet {
    /// Gains with isotropic adaptation blocks `g1·I_m`, `g2·I_n`.
    pub fn isotropic(
        alpha: f64,
        k: f64,
        beta: f64,
        g1: f64,
        g2: f64,
        m: usize,
        n: usize,
        theta_bar: f64,
    ) -> Self {
        Self {
            alpha,
            k,
            beta,
            gamma1: DMatrix::identity(m, m) * g1,
            gamma2: DMatrix::identity(n, n) * g2,
            theta_bar,
        }
    }

    /// Full `(n+m)×(n+m)` block-diagonal adaptation gain.
    pub fn gamma(&self) -> DMatrix<f64> {
        let m = self.gamma1.nrows();
        let n = self.gamma2.nrows();
        let mut g = DMatrix::zeros(n + m, n + m);
        g.view_mut((0, 0), (m, m)).copy_from(&self.gamma1);
        g.view_mut((m, m), (n, n)).copy_from(&self.gamma2);
        g
    }

    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        if !(self.alpha > 0.0 && self.k > 0.0 && self.beta > 0.0 && self.theta_bar > 0.0) {
            return Err(Error::InvalidConfig(
                "alpha, K, beta, theta_bar must be strictly positive".into(),
            ));
        }
        for (name, block, dim) in
            [("gamma1", &self.gamma1, m), ("gamma2", &self.gamma2, n)]
        {
            if block.nrows() != dim || block.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    context: "adaptation gain block",
                    expected: dim,
                    got: block.nrows(),
                });
            }
            if (block - block.transpose()).amax() > 1e-12 {
                return Err(Error::InvalidConfig(format!("{name} must be symmetric")));
            }
            let (lo, _) = symmetric_eigen_range(block);
            if !(lo > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be positive-definite")));
            }
        }
        Ok(())
    }

    /// Spectral norm of the full adaptation gain.
    pub fn gamma_spectral_norm(&self) -> f64 {
        let (_, hi1) = symmetric_eigen_range(&self.gamma1);
        let (_, hi2) = symmetric_eigen_range(&self.gamma2);
        hi1.max(hi2)
    }

    /// Smallest eigenvalue of the disturbance-side adaptation block.
    pub fn gamma2_min_eigenvalue(&self) -> f64 {
        symmetric_eigen_range(&self.gamma2).0
    }

    /// Guaranteed quadratic decay coefficient `min{α, K - 1/2}` of the
    /// certified Lyapunov decrease; must be positive for certification.
    pub fn damping_floor(&self) -> f64 {
        self.alpha.min(self.k - 0.5)
    }
}

/// Which branch of the switched update law is active.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// Estimate strictly inside the ball, or update pointing inward.
    Interior,
    /// Estimate on the (thickened) boundary with an outward update; the
    /// tangential component is applied instead.
    Boundary,
}

/// Mutable controller state: parameter estimate, auxiliary integral term,
/// and the branch taken at the last decision.
#[derive(Clone, Debug)]
pub struct ControllerState {
    pub theta_hat: DVector<f64>,
    pub mu: DVector<f64>,
    pub last_branch: Branch,
}

impl ControllerState {
    /// Fresh state; the auxiliary term starts at zero by construction.
    pub fn new(theta_hat0: DVector<f64>, n: usize) -> Self {
        Self { theta_hat: theta_hat0, mu: DVector::zeros(n), last_branch: Branch::Interior }
    }
}

/// Tracking error and filtered error; `r = e' + α e` wherever both exist.
#[derive(Clone, Debug)]
pub struct ErrorSignals {
    pub e: DVector<f64>,
    pub r: DVector<f64>,
}

impl ErrorSignals {
    pub fn from_derivative(e: DVector<f64>, e_dot: &DVector<f64>, alpha: f64) -> Self {
        let r = e_dot + &e * alpha;
        Self { e, r }
    }
}

/// Componentwise signum with `sgn(0) = 0` (the centroid of the set-valued
/// signum at zero, which minimizes chattering in a deterministic simulator).
pub fn sign_vector(e: &DVector<f64>) -> DVector<f64> {
    e.map(|v| {
        if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        }
    })
}

/// `e = x - x_d`.
pub fn tracking_error(x: &DVector<f64>, xd: &DVector<f64>) -> Result<DVector<f64>> {
    if x.len() != xd.len() {
        return Err(Error::DimensionMismatch {
            context: "tracking error",
            expected: xd.len(),
            got: x.len(),
        });
    }
    Ok(x - xd)
}

/// Filtered error from the open-loop error system, `r = Yθ + u - x_d' + αe`.
/// In simulation the state derivative is known exactly, so this must agree
/// with `e' + αe`.
pub fn filtered_error_from_closed_loop(
    e: &DVector<f64>,
    y: &AugmentedRegressor,
    theta: &DVector<f64>,
    u: &DVector<f64>,
    xd_dot: &DVector<f64>,
    alpha: f64,
) -> Result<DVector<f64>> {
    if theta.len() != y.n + y.m {
        return Err(Error::DimensionMismatch {
            context: "filtered error parameter",
            expected: y.n + y.m,
            got: theta.len(),
        });
    }
    if e.len() != y.n || u.len() != y.n || xd_dot.len() != y.n {
        return Err(Error::DimensionMismatch {
            context: "filtered error signals",
            expected: y.n,
            got: e.len(),
        });
    }
    Ok(&y.matrix * theta + u - xd_dot + e * alpha)
}

/// Control input `u = -Y_d θ̂ - α e + x_d' + μ`.
pub fn control_input(
    yd: &AugmentedRegressor,
    theta_hat: &DVector<f64>,
    e: &DVector<f64>,
    xd_dot: &DVector<f64>,
    mu: &DVector<f64>,
    alpha: f64,
) -> Result<DVector<f64>> {
    if theta_hat.len() != yd.n + yd.m {
        return Err(Error::DimensionMismatch {
            context: "control input estimate",
            expected: yd.n + yd.m,
            got: theta_hat.len(),
        });
    }
    if e.len() != yd.n || xd_dot.len() != yd.n || mu.len() != yd.n {
        return Err(Error::DimensionMismatch {
            context: "control input signals",
            expected: yd.n,
            got: e.len(),
        });
    }
    Ok(-(&yd.matrix * theta_hat) - e * alpha + xd_dot + mu)
}

/// Raw adaptation direction `Λ0 = Γ Y_dᵀ (Y_d Γ Y_dᵀ)⁻¹ β s` for a fixed
/// signum selection `s`. The Gram matrix `Y_d Γ Y_dᵀ` is positive-definite
/// whenever Γ is (its disturbance block alone guarantees it), so the solve
/// uses a Cholesky factorization after a conditioning check.
pub fn lambda0_from_sign(
    yd: &AugmentedRegressor,
    sgn_e: &DVector<f64>,
    gains: &GainSet,
) -> Result<DVector<f64>> {
    let gamma = gains.gamma();
    let gram = &yd.matrix * &gamma * yd.matrix.transpose();
    let (lo, hi) = symmetric_eigen_range(&gram);
    if !(lo > 0.0) || hi / lo > MAX_CONDITION {
        return Err(Error::IllConditioned {
            context: "adaptation gain solve",
            cond: if lo > 0.0 { hi / lo } else { f64::INFINITY },
        });
    }
    let rhs = sgn_e * gains.beta;
    let chol = nalgebra::linalg::Cholesky::new(gram).ok_or(Error::IllConditioned {
        context: "adaptation gain factorization",
        cond: hi / lo,
    })?;
    let w = chol.solve(&rhs);
    Ok(gamma * yd.matrix.transpose() * w)
}

/// Raw adaptation direction driven by the signum of the tracking error.
pub fn lambda0(
    yd: &AugmentedRegressor,
    e: &DVector<f64>,
    gains: &GainSet,
) -> Result<DVector<f64>> {
    if e.len() != yd.n {
        return Err(Error::DimensionMismatch {
            context: "adaptation direction error",
            expected: yd.n,
            got: e.len(),
        });
    }
    lambda0_from_sign(yd, &sign_vector(e), gains)
}

/// Gradient of the ball boundary function `f(θ) = θᵀθ - θ̄²`.
pub fn boundary_gradient(theta_hat: &DVector<f64>) -> DVector<f64> {
    theta_hat * 2.0
}

/// Whether the estimate has reached the (thickened) projection boundary.
pub fn on_boundary(theta_hat: &DVector<f64>, theta_bar: f64) -> bool {
    theta_hat.norm() >= theta_bar * (1.0 - BOUNDARY_THICKNESS)
}

/// Tangential component of `Λ0` at the boundary point `θ̂`:
/// `Λ1 = (I - ∇f ∇fᵀ / ‖∇f‖²) Λ0`.
pub fn lambda1(theta_hat: &DVector<f64>, lambda0: &DVector<f64>) -> Result<DVector<f64>> {
    let grad = boundary_gradient(theta_hat);
    let norm_sq = grad.norm_squared();
    if norm_sq == 0.0 {
        return Err(Error::InvariantViolation(
            "boundary branch with zero boundary gradient (estimate at origin)".into(),
        ));
    }
    Ok(lambda0 - &grad * (grad.dot(lambda0) / norm_sq))
}

/// Projected update: returns the estimate derivative and the branch taken.
/// The same branch decision must drive the auxiliary term at the same
/// instant.
pub fn project_update(
    theta_hat: &DVector<f64>,
    lambda0: &DVector<f64>,
    gains: &GainSet,
) -> Result<(DVector<f64>, Branch)> {
    let outward = boundary_gradient(theta_hat).dot(lambda0) > 0.0;
    if on_boundary(theta_hat, gains.theta_bar) && outward {
        Ok((lambda1(theta_hat, lambda0)?, Branch::Boundary))
    } else {
        Ok((lambda0.clone(), Branch::Interior))
    }
}

/// Auxiliary-term derivative: `-K r` on the interior branch, and
/// `-K r - Y_d (Λ0 - Λ1)` on the boundary branch, which restores the signum
/// forcing the projection removed from the estimate update.
pub fn mu_dot(
    branch: Branch,
    r: &DVector<f64>,
    yd: &AugmentedRegressor,
    lambda0: &DVector<f64>,
    lambda1: &DVector<f64>,
    gains: &GainSet,
) -> DVector<f64> {
    let base = r * (-gains.k);
    match branch {
        Branch::Interior => base,
        Branch::Boundary => base - &yd.matrix * (lambda0 - lambda1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_scenario;
    use crate::regressor::{eval_y, eval_yd};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn reg(n: usize, m: usize, rows: &[f64]) -> AugmentedRegressor {
        AugmentedRegressor { matrix: DMatrix::from_row_slice(n, n + m, rows), n, m }
    }

    #[test]
    fn tracking_error_is_plain_subtraction() {
        let e = tracking_error(
            &DVector::from_vec(vec![1.0, 2.0]),
            &DVector::from_vec(vec![0.0, 1.0]),
        )
        .unwrap();
        assert_eq!(e.as_slice(), &[1.0, 1.0]);
        let zero = tracking_error(
            &DVector::from_vec(vec![0.3, -0.4]),
            &DVector::from_vec(vec![0.3, -0.4]),
        )
        .unwrap();
        assert_eq!(zero.as_slice(), &[0.0, 0.0]);
        assert!(tracking_error(&DVector::zeros(2), &DVector::zeros(3)).is_err());
    }

    #[test]
    fn control_input_feedforward_only() {
        // e = 0, θ̂ = 0, μ = 0 leaves only the reference velocity
        let yd = reg(1, 1, &[0.3, 1.0]);
        let u = control_input(
            &yd,
            &DVector::zeros(2),
            &DVector::zeros(1),
            &DVector::from_vec(vec![0.7]),
            &DVector::zeros(1),
            2.0,
        )
        .unwrap();
        assert_eq!(u.as_slice(), &[0.7]);
    }

    #[test]
    fn control_input_hand_case() {
        // S1 at t = 0: Y_d = [0, 1], θ̂ = [0.5, 0.1], e = 1, μ = 0.2, α = 2
        let sc = builtin_scenario("S1_scalar").unwrap();
        let yd = eval_yd(&sc.model, &sc.reference, 0.0).unwrap();
        let u = control_input(
            &yd,
            &DVector::from_vec(vec![0.5, 0.1]),
            &DVector::from_vec(vec![1.0]),
            &sc.reference.xd_dot(0.0),
            &DVector::from_vec(vec![0.2]),
            2.0,
        )
        .unwrap();
        assert_relative_eq!(u[0], -0.9, epsilon = 1e-12);
    }

    #[test]
    fn filtered_error_hand_case_and_path_agreement() {
        // S1 at t = 0 with x = 1, θ̂ = 0, μ = 0, α = 1: u = 0 and r = 1
        let sc = builtin_scenario("S1_scalar").unwrap();
        let x = DVector::from_vec(vec![1.0]);
        let e = tracking_error(&x, &sc.reference.xd(0.0)).unwrap();
        let yd = eval_yd(&sc.model, &sc.reference, 0.0).unwrap();
        let y = eval_y(&sc.model, &x, 0.0).unwrap();
        let theta = sc.model.eval_theta(0.0);
        let u = control_input(
            &yd,
            &DVector::zeros(2),
            &e,
            &sc.reference.xd_dot(0.0),
            &DVector::zeros(1),
            1.0,
        )
        .unwrap();
        assert_relative_eq!(u[0], 0.0, epsilon = 1e-15);
        let r =
            filtered_error_from_closed_loop(&e, &y, &theta, &u, &sc.reference.xd_dot(0.0), 1.0)
                .unwrap();
        assert_relative_eq!(r[0], 1.0, epsilon = 1e-12);

        // same r from the derivative path: e' = x' - x_d' with x' = Yθ + u
        let e_dot = &y.matrix * &theta + &u - sc.reference.xd_dot(0.0);
        let signals = ErrorSignals::from_derivative(e.clone(), &e_dot, 1.0);
        assert_relative_eq!(signals.r[0], r[0], epsilon = 1e-14);
    }

    #[test]
    fn perfect_tracking_fixed_point_gives_zero_r() {
        let sc = builtin_scenario("S2_twostate").unwrap();
        let t = 1.3;
        let xd = sc.reference.xd(t);
        let y = eval_y(&sc.model, &xd, t).unwrap();
        let theta = sc.model.eval_theta(t);
        let e = DVector::zeros(2);
        let u = sc.reference.xd_dot(t) - &y.matrix * &theta;
        let r = filtered_error_from_closed_loop(&e, &y, &theta, &u, &sc.reference.xd_dot(t), 2.0)
            .unwrap();
        assert!(r.norm() < 1e-14);
    }

    #[test]
    fn lambda0_zero_error_convention() {
        let sc = builtin_scenario("S1_scalar").unwrap();
        let yd = eval_yd(&sc.model, &sc.reference, 0.7).unwrap();
        let l0 = lambda0(&yd, &DVector::zeros(1), &sc.gains).unwrap();
        assert_eq!(l0.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn lambda0_identity_block_case() {
        // zero plant regressor block and Γ = I: the solve collapses to the
        // identity and Λ0 = [0_m; β sgn(e)]
        let yd = reg(2, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let gains = GainSet::isotropic(1.0, 1.0, 3.0, 1.0, 1.0, 2, 2, 1.0);
        let e = DVector::from_vec(vec![0.5, -0.2]);
        let l0 = lambda0(&yd, &e, &gains).unwrap();
        assert_relative_eq!(l0[0], 0.0, epsilon = 1e-14);
        assert_relative_eq!(l0[1], 0.0, epsilon = 1e-14);
        assert_relative_eq!(l0[2], 3.0, epsilon = 1e-14);
        assert_relative_eq!(l0[3], -3.0, epsilon = 1e-14);
    }

    #[test]
    fn lambda0_scalar_formula_case() {
        // 1-D oracle: for Γ = I, Λ0 = Y_dᵀ β sgn(e) / ‖Y_d‖²; with
        // Y_d = [0.6, 1]: ‖Y_d‖² = 1.36
        let yd = reg(1, 1, &[0.6, 1.0]);
        let gains = GainSet::isotropic(1.0, 1.0, 1.0, 1.0, 1.0, 1, 1, 1.0);
        let l0 = lambda0(&yd, &DVector::from_vec(vec![0.4]), &gains).unwrap();
        assert_relative_eq!(l0[0], 0.6 / 1.36, epsilon = 1e-12);
        assert_relative_eq!(l0[1], 1.0 / 1.36, epsilon = 1e-12);
    }

    #[test]
    fn lambda0_is_odd_in_the_error() {
        let sc = builtin_scenario("S2_twostate").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let t: f64 = rng.random_range(0.0..40.0);
            let yd = eval_yd(&sc.model, &sc.reference, t).unwrap();
            let e = DVector::from_fn(2, |_, _| rng.random_range(-2.0..2.0));
            let plus = lambda0(&yd, &e, &sc.gains).unwrap();
            let minus = lambda0(&yd, &(-&e), &sc.gains).unwrap();
            assert!((plus + minus).norm() < 1e-12);
        }
    }

    #[test]
    fn projection_interior_passthrough() {
        let gains = GainSet::isotropic(1.0, 1.0, 1.0, 1.0, 1.0, 1, 1, 1.0);
        let th = DVector::from_vec(vec![0.5, 0.0]);
        let l0 = DVector::from_vec(vec![4.0, -3.0]);
        let (dot, branch) = project_update(&th, &l0, &gains).unwrap();
        assert_eq!(branch, Branch::Interior);
        assert_eq!(dot, l0);
    }

    #[test]
    fn projection_annihilates_radial_update() {
        let gains = GainSet::isotropic(1.0, 1.0, 1.0, 1.0, 1.0, 1, 1, 1.0);
        let th = DVector::from_vec(vec![0.6, 0.8]); // on the unit sphere
        let l0 = &th * 2.5; // purely outward
        let (dot, branch) = project_update(&th, &l0, &gains).unwrap();
        assert_eq!(branch, Branch::Boundary);
        assert!(dot.norm() < 1e-12);
    }

    #[test]
    fn projection_hand_case_and_tangency() {
        // θ̄ = 1, θ̂ = [1, 0], Λ0 = [1, 1] → Λ1 = [0, 1]
        let gains = GainSet::isotropic(1.0, 1.0, 1.0, 1.0, 1.0, 1, 1, 1.0);
        let th = DVector::from_vec(vec![1.0, 0.0]);
        let l0 = DVector::from_vec(vec![1.0, 1.0]);
        let (dot, branch) = project_update(&th, &l0, &gains).unwrap();
        assert_eq!(branch, Branch::Boundary);
        assert_relative_eq!(dot[0], 0.0, epsilon = 1e-14);
        assert_relative_eq!(dot[1], 1.0, epsilon = 1e-14);
        assert!(boundary_gradient(&th).dot(&dot).abs() < 1e-14);
    }

    #[test]
    fn projection_inward_update_stays_raw_on_boundary() {
        let gains = GainSet::isotropic(1.0, 1.0, 1.0, 1.0, 1.0, 1, 1, 1.0);
        let th = DVector::from_vec(vec![1.0, 0.0]);
        let l0 = DVector::from_vec(vec![-0.3, 0.4]); // inward: ∇fᵀΛ0 < 0
        let (dot, branch) = project_update(&th, &l0, &gains).unwrap();
        assert_eq!(branch, Branch::Interior);
        assert_eq!(dot, l0);
    }

    #[test]
    fn mu_dot_hand_case() {
        // K = 2, r = 0.5, Y_d = [0.6, 1], Λ0 = [1, 1], Λ1 = [0, 1] → -1.6
        let yd = reg(1, 1, &[0.6, 1.0]);
        let gains = GainSet::isotropic(1.0, 2.0, 1.0, 1.0, 1.0, 1, 1, 1.0);
        let r = DVector::from_vec(vec![0.5]);
        let l0 = DVector::from_vec(vec![1.0, 1.0]);
        let l1 = DVector::from_vec(vec![0.0, 1.0]);
        let md = mu_dot(Branch::Boundary, &r, &yd, &l0, &l1, &gains);
        assert_relative_eq!(md[0], -1.6, epsilon = 1e-14);

        // interior: plain -K r; boundary with Λ1 = Λ0 matches it
        let interior = mu_dot(Branch::Interior, &r, &yd, &l0, &l1, &gains);
        assert_relative_eq!(interior[0], -1.0, epsilon = 1e-14);
        let tangential = mu_dot(Branch::Boundary, &r, &yd, &l0, &l0, &gains);
        assert_relative_eq!(tangential[0], -1.0, epsilon = 1e-14);
        let zero_r = mu_dot(Branch::Interior, &DVector::zeros(1), &yd, &l0, &l1, &gains);
        assert_eq!(zero_r.as_slice(), &[0.0]);
    }

    #[test]
    fn boundary_cancellation_restores_signum_forcing() {
        // Y_d θ̂' + the μ' correction equals β sgn(e) on either branch
        let sc = builtin_scenario("S2_twostate").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let t: f64 = rng.random_range(0.0..40.0);
            let yd = eval_yd(&sc.model, &sc.reference, t).unwrap();
            let e = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
            let dir = DVector::from_fn(5, |_, _| rng.random_range(-1.0..1.0)).normalize();
            let th = dir * sc.gains.theta_bar; // on the sphere
            let l0 = lambda0(&yd, &e, &sc.gains).unwrap();
            let (dot, branch) = project_update(&th, &l0, &sc.gains).unwrap();
            let l1 = match branch {
                Branch::Boundary => dot.clone(),
                Branch::Interior => l0.clone(),
            };
            let r = DVector::zeros(2);
            let md = mu_dot(branch, &r, &yd, &l0, &l1, &sc.gains);
            let total = &yd.matrix * &dot + (-md);
            let forcing = sign_vector(&e) * sc.gains.beta;
            assert!((total - forcing).norm() < 1e-10);
        }
    }

    #[test]
    fn gain_set_validation() {
        let mut gains = GainSet::isotropic(2.0, 5.0, 8.0, 1.0, 1.0, 1, 1, 1.875);
        gains.validate(1, 1).unwrap();
        gains.beta = 0.0;
        assert!(gains.validate(1, 1).is_err());
        let asym = GainSet {
            gamma1: DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]),
            ..GainSet::isotropic(1.0, 1.0, 1.0, 1.0, 1.0, 2, 1, 1.0)
        };
        assert!(asym.validate(1, 2).is_err());
    }

    #[test]
    fn damping_floor_definition() {
        let gains = GainSet::isotropic(2.0, 5.0, 8.0, 1.0, 1.0, 1, 1, 1.0);
        assert_eq!(gains.damping_floor(), 2.0);
        let low_k = GainSet::isotropic(2.0, 0.4, 8.0, 1.0, 1.0, 1, 1, 1.0);
        assert!(low_k.damping_floor() < 0.0);
    }
}
