//! Comparison controllers.
//!
//! * Leakage-modified gradient adaptation (`sigma_mod`): certainty-equivalence
//!   feedback with `θ̂' = γ Yᵀ e − γ σ θ̂`. Bounded under time-varying
//!   parameters, but the error only reaches a neighborhood of zero.
//! * Plain gradient adaptation (`gradient`): the same law with `σ = 0`, the
//!   classic asymptotic design for constant parameters.
//! * Worst-case robust feedback (`robust`): no adaptation; dominates the
//!   uncertainty with a known bound on the parameter magnitude.
//!
//! The scalar laws generalize to the vector plant through the
//! tracking-error-driven gradient `Yᵀ e` and, for the robust law, a
//! `‖x‖`-scaled worst-case term directed by `sgn(e)`; on the scalar plant
//! with a zero reference they reduce exactly to `u = -k x - â x`,
//! `θ̂' = γ x² - γ σ θ̂` and `u = -k x - ā x`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::regressor::AugmentedRegressor;

/// Gains of the comparison controllers.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BaselineGains {
    /// Proportional feedback gain.
    pub k: f64,
    /// Scalar adaptation gain (applied isotropically).
    pub gamma: f64,
    /// Leakage coefficient; zero recovers the plain gradient law.
    pub sigma: f64,
    /// Known worst-case bound on the parameter magnitude (robust law only).
    pub a_bar: f64,
}

impl BaselineGains {
    pub fn validate(&self) -> Result<()> {
        if !(self.k > 0.0 && self.gamma > 0.0 && self.sigma >= 0.0 && self.a_bar > 0.0) {
            return Err(Error::InvalidConfig(
                "baseline gains require k > 0, gamma > 0, sigma >= 0, a_bar > 0".into(),
            ));
        }
        Ok(())
    }
}

/// One evaluation of the leakage-modified gradient law: returns the control
/// input and the estimate derivative. Pass `sigma = 0` for the plain
/// gradient law.
pub fn sigma_mod_step(
    e: &DVector<f64>,
    y: &AugmentedRegressor,
    theta_hat: &DVector<f64>,
    xd_dot: &DVector<f64>,
    gains: &BaselineGains,
    sigma: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    if theta_hat.len() != y.n + y.m {
        return Err(Error::DimensionMismatch {
            context: "baseline estimate",
            expected: y.n + y.m,
            got: theta_hat.len(),
        });
    }
    if e.len() != y.n || xd_dot.len() != y.n {
        return Err(Error::DimensionMismatch {
            context: "baseline signals",
            expected: y.n,
            got: e.len(),
        });
    }
    let u = -(e * gains.k) - &y.matrix * theta_hat + xd_dot;
    let theta_hat_dot = y.matrix.transpose() * e * gains.gamma - theta_hat * (gains.gamma * sigma);
    Ok((u, theta_hat_dot))
}

/// Worst-case robust feedback `u = -k e - ā ‖x‖ s + x_d'`, where `s` is the
/// (per-step frozen) signum of the tracking error. On the scalar plant with
/// a zero reference this is literally `-k x - ā x`.
pub fn robust_step(
    x: &DVector<f64>,
    e: &DVector<f64>,
    xd_dot: &DVector<f64>,
    sgn_e: &DVector<f64>,
    gains: &BaselineGains,
) -> DVector<f64> {
    -(e * gains.k) - sgn_e * (gains.a_bar * x.norm()) + xd_dot
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::sign_vector;
    use crate::model::builtin_scenario;
    use crate::regressor::eval_y;
    use approx::assert_relative_eq;

    fn gains() -> BaselineGains {
        BaselineGains { k: 5.0, gamma: 10.0, sigma: 0.1, a_bar: 1.5 }
    }

    #[test]
    fn rest_state_gives_feedforward_only() {
        let sc = builtin_scenario("S1_scalar").unwrap();
        let y = eval_y(&sc.model, &DVector::zeros(1), 0.3).unwrap();
        let xd_dot = sc.reference.xd_dot(0.3);
        let (u, dot) =
            sigma_mod_step(&DVector::zeros(1), &y, &DVector::zeros(2), &xd_dot, &gains(), 0.1)
                .unwrap();
        assert_eq!(u, xd_dot);
        assert_eq!(dot.as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn gradient_law_reduces_to_scalar_square_update() {
        // zero reference on the scalar plant: θ̂₁' = γ x², the classic law
        let mut cfg = crate::config::ScenarioConfig::builtin("S3_constant_param");
        cfg.apply_override("ref_amplitude", "0").unwrap();
        let sc = cfg.build().unwrap();
        for &x in &[0.7, -1.3, 2.0] {
            let xv = DVector::from_vec(vec![x]);
            let y = eval_y(&sc.model, &xv, 1.0).unwrap();
            let e = xv.clone(); // x_d = 0
            let (_, dot) =
                sigma_mod_step(&e, &y, &DVector::zeros(2), &DVector::zeros(1), &gains(), 0.0)
                    .unwrap();
            assert_relative_eq!(dot[0], 10.0 * x * x, epsilon = 1e-13);
            assert_relative_eq!(dot[1], 10.0 * x, epsilon = 1e-13);
        }
    }

    #[test]
    fn leakage_term_enters_with_sigma() {
        let sc = builtin_scenario("S1_scalar").unwrap();
        let y = eval_y(&sc.model, &DVector::zeros(1), 0.0).unwrap();
        let th = DVector::from_vec(vec![0.4, -0.2]);
        let (_, dot) =
            sigma_mod_step(&DVector::zeros(1), &y, &th, &DVector::zeros(1), &gains(), 0.1)
                .unwrap();
        assert_relative_eq!(dot[0], -10.0 * 0.1 * 0.4, epsilon = 1e-14);
        assert_relative_eq!(dot[1], -10.0 * 0.1 * -0.2, epsilon = 1e-14);
    }

    #[test]
    fn robust_law_at_origin_is_feedforward() {
        let xd_dot = DVector::from_vec(vec![0.9]);
        let u = robust_step(
            &DVector::zeros(1),
            &DVector::zeros(1),
            &xd_dot,
            &DVector::zeros(1),
            &gains(),
        );
        assert_eq!(u, xd_dot);
    }

    #[test]
    fn robust_law_scalar_regulation_form() {
        // zero reference: u = -k x - ā |x| sgn(x) = -(k + ā) x
        let g = gains();
        for &x in &[0.8, -0.6] {
            let xv = DVector::from_vec(vec![x]);
            let u = robust_step(&xv, &xv, &DVector::zeros(1), &sign_vector(&xv), &g);
            assert_relative_eq!(u[0], -(g.k + g.a_bar) * x, epsilon = 1e-14);
        }
    }
}
