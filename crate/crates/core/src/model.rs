//! Plant models, reference trajectories, and complete simulation scenarios.
//!
//! A plant is control-affine, `x' = h(x,t) + d(t) + u`, with the uncertain
//! part linearly parameterized as `h(x,t) = Y_h(x,t) θ_f(t)`. Trajectories
//! (`θ_f`, `d`, `x_d`) are supplied as closed-form callables together with
//! their analytic derivatives so that the bounding constants consumed by the
//! gain condition are exact rather than estimated.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::baselines::BaselineGains;
use crate::config::ScenarioConfig;
use crate::controller::GainSet;
use crate::error::{Error, Result};
use crate::sweep;

/// Closed-form vector signal of time.
pub type SignalFn = Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>;
/// Closed-form regressor `(x, t) -> n×m` matrix.
pub type RegressorFn = Arc<dyn Fn(&DVector<f64>, f64) -> DMatrix<f64> + Send + Sync>;

/// Control-affine plant with linearly parameterized uncertainty.
///
/// Immutable after construction; all closures are shared and thread-safe.
#[derive(Clone)]
pub struct SystemModel {
    /// State dimension.
    pub n: usize,
    /// Parameter dimension (columns of the plant regressor).
    pub m: usize,
    yh: RegressorFn,
    theta_f: SignalFn,
    theta_f_dot: SignalFn,
    d: SignalFn,
    d_dot: SignalFn,
}

impl SystemModel {
    pub fn new(
        n: usize,
        m: usize,
        yh: RegressorFn,
        theta_f: SignalFn,
        theta_f_dot: SignalFn,
        d: SignalFn,
        d_dot: SignalFn,
    ) -> Self {
        Self { n, m, yh, theta_f, theta_f_dot, d, d_dot }
    }

    /// Plant regressor `Y_h(x, t)`, an `n×m` matrix.
    pub fn yh(&self, x: &DVector<f64>, t: f64) -> DMatrix<f64> {
        (self.yh)(x, t)
    }

    /// True time-varying parameter vector (length `m`).
    pub fn theta_f(&self, t: f64) -> DVector<f64> {
        (self.theta_f)(t)
    }

    /// Exogenous disturbance (length `n`).
    pub fn d(&self, t: f64) -> DVector<f64> {
        (self.d)(t)
    }

    /// Augmented parameter vector `[θ_f(t); d(t)]` of length `n + m`,
    /// stacking the disturbance under the plant parameters.
    pub fn eval_theta(&self, t: f64) -> DVector<f64> {
        let top = (self.theta_f)(t);
        let bot = (self.d)(t);
        stack(&top, &bot)
    }

    /// Analytic time derivative of [`Self::eval_theta`].
    pub fn eval_theta_dot(&self, t: f64) -> DVector<f64> {
        let top = (self.theta_f_dot)(t);
        let bot = (self.d_dot)(t);
        stack(&top, &bot)
    }
}

fn stack(top: &DVector<f64>, bot: &DVector<f64>) -> DVector<f64> {
    let mut v = DVector::zeros(top.len() + bot.len());
    v.rows_mut(0, top.len()).copy_from(top);
    v.rows_mut(top.len(), bot.len()).copy_from(bot);
    v
}

/// Augmented parameter vector of a model at time `t` (free-function form).
pub fn eval_theta(model: &SystemModel, t: f64) -> DVector<f64> {
    model.eval_theta(t)
}

/// Smooth bounded reference trajectory with its first two derivatives and
/// the constants bounding them on the horizon.
#[derive(Clone)]
pub struct ReferenceTrajectory {
    xd: SignalFn,
    xd_dot: SignalFn,
    xd_ddot: SignalFn,
    /// Bound on `‖x_d(t)‖`.
    pub x_d_bar: f64,
    /// Bound on `‖x_d'(t)‖`.
    pub delta1: f64,
    /// Bound on `‖x_d''(t)‖`.
    pub delta2: f64,
}

impl ReferenceTrajectory {
    pub fn new(
        xd: SignalFn,
        xd_dot: SignalFn,
        xd_ddot: SignalFn,
        x_d_bar: f64,
        delta1: f64,
        delta2: f64,
    ) -> Self {
        Self { xd, xd_dot, xd_ddot, x_d_bar, delta1, delta2 }
    }

    pub fn xd(&self, t: f64) -> DVector<f64> {
        (self.xd)(t)
    }

    pub fn xd_dot(&self, t: f64) -> DVector<f64> {
        (self.xd_dot)(t)
    }

    pub fn xd_ddot(&self, t: f64) -> DVector<f64> {
        (self.xd_ddot)(t)
    }
}

/// Known bounds on the augmented parameter trajectory and its derivatives.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ParameterBounds {
    /// Bound on `‖θ(t)‖`; also the projection-ball radius.
    pub theta_bar: f64,
    /// Bound on `‖θ'(t)‖`.
    pub zeta1: f64,
    /// Bound on `‖θ''(t)‖`.
    pub zeta2: f64,
}

impl ParameterBounds {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_bar > 0.0 && self.zeta1 > 0.0 && self.zeta2 > 0.0) {
            return Err(Error::InvalidConfig(
                "parameter bounds must be strictly positive".into(),
            ));
        }
        Ok(())
    }
}

/// Which control law drives a run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControllerKind {
    /// Adaptive law with signum-driven projection update and auxiliary
    /// integral term; the asymptotic-tracking design.
    Rise,
    /// Gradient adaptation with leakage; bounded but non-vanishing error.
    SigmaMod,
    /// Worst-case-bound feedback, no adaptation.
    Robust,
    /// Classic gradient adaptation (leakage set to zero).
    Gradient,
}

impl ControllerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ControllerKind::Rise => "rise",
            ControllerKind::SigmaMod => "sigma_mod",
            ControllerKind::Robust => "robust",
            ControllerKind::Gradient => "gradient",
        }
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rise" => Ok(ControllerKind::Rise),
            "sigma_mod" => Ok(ControllerKind::SigmaMod),
            "robust" => Ok(ControllerKind::Robust),
            "gradient" => Ok(ControllerKind::Gradient),
            other => Err(Error::InvalidConfig(format!(
                "unknown controller `{other}` (expected rise, sigma_mod, robust, or gradient)"
            ))),
        }
    }
}

/// A complete experiment: plant, reference, bounds, gains, initial
/// conditions, and integration settings.
#[derive(Clone)]
pub struct Scenario {
    pub name: String,
    pub model: SystemModel,
    pub reference: ReferenceTrajectory,
    pub bounds: ParameterBounds,
    pub gains: GainSet,
    pub baseline_gains: BaselineGains,
    pub x0: DVector<f64>,
    pub theta_hat0: DVector<f64>,
    pub t_end: f64,
    pub dt: f64,
    pub controller: ControllerKind,
    pub(crate) source: ScenarioConfig,
}

impl Scenario {
    /// Builds one of the built-in scenarios by name.
    pub fn builtin(name: &str) -> Result<Scenario> {
        ScenarioConfig::builtin(name).build()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.model.n, self.model.m)
    }

    /// The serializable configuration this scenario was built from.
    /// Rebuilding from it reproduces the scenario bitwise.
    pub fn to_config(&self) -> ScenarioConfig {
        self.source.clone()
    }

    /// Structural validation plus a sampled check of the declared bounds.
    pub fn validate(&self) -> Result<()> {
        let (n, m) = self.dims();
        if n == 0 || m == 0 {
            return Err(Error::InvalidConfig("dimensions must be positive".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidConfig("dt must be positive".into()));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::InvalidConfig("t_end must be nonnegative".into()));
        }
        if self.x0.len() != n {
            return Err(Error::DimensionMismatch {
                context: "initial state",
                expected: n,
                got: self.x0.len(),
            });
        }
        if self.theta_hat0.len() != n + m {
            return Err(Error::DimensionMismatch {
                context: "initial parameter estimate",
                expected: n + m,
                got: self.theta_hat0.len(),
            });
        }
        self.bounds.validate()?;
        self.gains.validate(n, m)?;
        self.baseline_gains.validate()?;
        // The projection construction requires the estimate to start strictly
        // inside the ball.
        if !(self.theta_hat0.norm() < self.gains.theta_bar) {
            return Err(Error::InvalidConfig(format!(
                "initial estimate norm {:.6} must be < theta_bar {:.6}",
                self.theta_hat0.norm(),
                self.gains.theta_bar
            )));
        }
        let y0 = self.model.yh(&self.x0, 0.0);
        if y0.nrows() != n || y0.ncols() != m {
            return Err(Error::DimensionMismatch {
                context: "plant regressor output",
                expected: n * m,
                got: y0.nrows() * y0.ncols(),
            });
        }
        if y0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("plant regressor at initial state"));
        }
        self.check_sampled_bounds(1024)
    }

    /// Verifies the declared trajectory bounds by dense sampling over the
    /// horizon: `‖θ‖ ≤ θ̄`, `‖θ'‖ ≤ ζ₁`, `‖x_d‖ ≤ x̄_d`, `‖x_d'‖ ≤ δ₁`,
    /// `‖x_d''‖ ≤ δ₂`.
    pub fn check_sampled_bounds(&self, samples: usize) -> Result<()> {
        let t1 = if self.t_end > 0.0 { self.t_end } else { 1.0 };
        let slack = |b: f64| b * (1.0 + 1e-9) + 1e-12;

        let model = &self.model;
        let sup_theta = sweep::grid_sup(0.0, t1, samples, |t| model.eval_theta(t).norm());
        if !(sup_theta <= slack(self.bounds.theta_bar)) {
            return Err(Error::InvalidConfig(format!(
                "sampled ‖θ(t)‖ = {sup_theta:.6} exceeds theta_bar {:.6}",
                self.bounds.theta_bar
            )));
        }
        let sup_rate = sweep::grid_sup(0.0, t1, samples, |t| model.eval_theta_dot(t).norm());
        if !(sup_rate <= slack(self.bounds.zeta1)) {
            return Err(Error::InvalidConfig(format!(
                "sampled ‖θ'(t)‖ = {sup_rate:.6} exceeds zeta1 {:.6}",
                self.bounds.zeta1
            )));
        }
        let reference = &self.reference;
        let checks: [(&str, f64, Box<dyn Fn(f64) -> f64 + Sync>); 3] = [
            ("x_d", self.reference.x_d_bar, Box::new(|t| reference.xd(t).norm())),
            ("x_d'", self.reference.delta1, Box::new(|t| reference.xd_dot(t).norm())),
            ("x_d''", self.reference.delta2, Box::new(|t| reference.xd_ddot(t).norm())),
        ];
        for (what, bound, f) in checks {
            let sup = sweep::grid_sup(0.0, t1, samples, f.as_ref());
            if !(sup <= slack(bound)) {
                return Err(Error::InvalidConfig(format!(
                    "sampled ‖{what}(t)‖ = {sup:.6} exceeds declared bound {bound:.6}"
                )));
            }
        }
        Ok(())
    }
}

/// Builds one of the built-in scenarios by name (free-function form).
pub fn builtin_scenario(name: &str) -> Result<Scenario> {
    Scenario::builtin(name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn builtin_names_resolve() {
        for name in ["S1_scalar", "S2_twostate", "S3_constant_param", "S4_disturbance_only"] {
            let sc = builtin_scenario(name).unwrap();
            sc.validate().unwrap();
            assert_eq!(sc.name, name);
        }
    }

    #[test]
    fn unknown_builtin_is_an_identifier_error() {
        match builtin_scenario("S9_no_such") {
            Err(Error::UnknownScenario(name)) => assert_eq!(name, "S9_no_such"),
            Err(other) => panic!("expected UnknownScenario, got {other}"),
            Ok(_) => panic!("expected UnknownScenario, got a scenario"),
        }
    }

    #[test]
    fn s1_theta_at_zero() {
        // a(0) = 1 + 0.5 sin 0 = 1, no disturbance
        let sc = builtin_scenario("S1_scalar").unwrap();
        let th = sc.model.eval_theta(0.0);
        assert_eq!(th.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn s2_theta_at_half_pi() {
        let sc = builtin_scenario("S2_twostate").unwrap();
        let th = sc.model.eval_theta(FRAC_PI_2);
        let expected = [1.3, -0.7, 0.8, -0.1, 0.0];
        for (got, want) in th.iter().zip(expected) {
            assert_relative_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn s4_plant_parameters_are_zero() {
        let sc = builtin_scenario("S4_disturbance_only").unwrap();
        for i in 0..200 {
            let t = 0.21 * i as f64;
            let th = sc.model.eval_theta(t);
            for j in 0..sc.model.m {
                assert_eq!(th[j], 0.0);
            }
        }
    }

    #[test]
    fn s1_bound_constants_match_dense_sampling() {
        // independent oracle: dense sampling of a(t) = 1 + 0.5 sin 2t and its
        // derivatives over one period
        let sc = builtin_scenario("S1_scalar").unwrap();
        let sup_a = sweep::grid_sup_seq(0.0, PI, 200_000, |t| (1.0 + 0.5 * (2.0 * t).sin()).abs());
        let sup_da = sweep::grid_sup_seq(0.0, PI, 200_000, |t| (2.0 * t).cos().abs());
        let sup_dda = sweep::grid_sup_seq(0.0, PI, 200_000, |t| (2.0 * (2.0 * t).sin()).abs());
        assert_relative_eq!(sup_a, 1.5, epsilon = 1e-9);
        assert_relative_eq!(sup_da, 1.0, epsilon = 1e-9);
        assert_relative_eq!(sup_dda, 2.0, epsilon = 1e-9);
        // stored constants cover the sampled sups; theta_bar carries the
        // deliberate 1.25 margin
        assert_relative_eq!(sc.bounds.theta_bar, 1.25 * 1.5, epsilon = 1e-12);
        assert!(sc.bounds.zeta1 >= sup_da);
        assert!(sc.bounds.zeta2 >= sup_dda);
    }

    #[test]
    fn theta_norm_within_bar_at_dense_grid() {
        for name in ["S1_scalar", "S2_twostate", "S3_constant_param", "S4_disturbance_only"] {
            let sc = builtin_scenario(name).unwrap();
            sc.check_sampled_bounds(10_000).unwrap();
        }
    }

    #[test]
    fn theta_rate_finite_difference_within_zeta1() {
        let h = 1e-6;
        for name in ["S1_scalar", "S2_twostate", "S3_constant_param", "S4_disturbance_only"] {
            let sc = builtin_scenario(name).unwrap();
            let sup_fd = sweep::grid_sup_seq(h, sc.t_end - h, 10_000, |t| {
                ((sc.model.eval_theta(t + h) - sc.model.eval_theta(t - h)) / (2.0 * h)).norm()
            });
            assert!(
                sup_fd <= sc.bounds.zeta1 * (1.0 + 1e-3),
                "{name}: FD sup {sup_fd} vs zeta1 {}",
                sc.bounds.zeta1
            );
        }
    }

    #[test]
    fn reference_derivative_consistency() {
        // central difference of x_d matches the analytic x_d' to O(h^2)
        let h = 1e-4;
        for name in ["S1_scalar", "S2_twostate", "S3_constant_param", "S4_disturbance_only"] {
            let sc = builtin_scenario(name).unwrap();
            let worst = sweep::grid_sup_seq(h, sc.t_end - h, 5_000, |t| {
                let fd = (sc.reference.xd(t + h) - sc.reference.xd(t - h)) / (2.0 * h);
                (fd - sc.reference.xd_dot(t)).norm()
            });
            assert!(worst < 1e-6, "{name}: worst FD mismatch {worst}");
        }
    }

    #[test]
    fn initial_estimate_outside_ball_rejected() {
        let mut cfg = ScenarioConfig::builtin("S1_scalar");
        cfg.theta_hat0 = Some(vec![5.0, 0.0]);
        assert!(matches!(cfg.build(), Err(Error::InvalidConfig(_))));
    }
}
