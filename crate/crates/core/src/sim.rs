//! Fixed-step closed-loop integration with full trajectory recording.
//!
//! The coupled system (plant state, parameter estimate, auxiliary term,
//! integral certificate) advances with classical 4th-order Runge–Kutta. The
//! discontinuous selections — the signum of the tracking error and the
//! projection branch — are evaluated once at the start of each step and held
//! fixed across the sub-stages, which selects one generalized solution and
//! keeps runs bitwise reproducible. The certificate advances alongside the
//! state as `P' = -rᵀ(N_B - β sgn e)` with `N_B = Y_d θ' + Y_d'(θ - θ̂)`,
//! using the analytic parameter rate and a finite-differenced `Y_d'`.
//!
//! After each step the estimate is retracted radially onto the projection
//! ball if the discrete update overshot it: the continuous projection law
//! never leaves the ball, and the retraction (the metric projection onto a
//! ball) restores that invariant without enlarging the step.

use nalgebra::{DMatrix, DVector};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::baselines;
use crate::controller::{self, Branch};
use crate::error::{Error, Result};
use crate::model::{ControllerKind, ReferenceTrajectory, Scenario, SystemModel};
use crate::regressor::{y_matrix, yd_matrix, AugmentedRegressor};

/// Any state norm beyond this aborts the run with a divergence error.
pub const DIVERGENCE_CUTOFF: f64 = 1e9;

/// Integrator state.
#[derive(Clone, Debug)]
pub struct SimState {
    pub t: f64,
    pub x: DVector<f64>,
    pub theta_hat: DVector<f64>,
    pub mu: DVector<f64>,
    /// Integral certificate; nonnegative along compliant runs.
    pub p: f64,
}

/// One recorded instant of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: DVector<f64>,
    pub x_d: DVector<f64>,
    pub e: DVector<f64>,
    pub r: DVector<f64>,
    pub u: DVector<f64>,
    pub theta: DVector<f64>,
    pub theta_hat: DVector<f64>,
    pub theta_tilde: DVector<f64>,
    pub mu: DVector<f64>,
    pub p: f64,
    pub v_l: f64,
    pub branch: Branch,
    /// True when the projection branch changed relative to the previous
    /// sample.
    pub switched: bool,
}

/// Complete time-indexed log of a run: uniformly spaced, strictly
/// increasing, first sample at `t = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub scenario: String,
    pub controller: ControllerKind,
    pub n: usize,
    pub m: usize,
    pub dt: f64,
    pub samples: Vec<Sample>,
}

impl TrajectoryRecord {
    /// Root-mean-square of `‖e‖` over samples with `t >= start`.
    pub fn rms_error_from(&self, start: f64) -> f64 {
        let mut acc = 0.0;
        let mut count = 0usize;
        for s in &self.samples {
            if s.t >= start {
                acc += s.e.norm_squared();
                count += 1;
            }
        }
        if count == 0 {
            0.0
        } else {
            (acc / count as f64).sqrt()
        }
    }

    /// Maximum of `‖e‖` over samples with `t >= start`.
    pub fn max_error_from(&self, start: f64) -> f64 {
        self.samples
            .iter()
            .filter(|s| s.t >= start)
            .map(|s| s.e.norm())
            .fold(0.0, f64::max)
    }

    /// Start of the final-window metrics (last 10% of the horizon).
    pub fn final_window_start(&self) -> f64 {
        match self.samples.last() {
            Some(last) => 0.9 * last.t,
            None => 0.0,
        }
    }

    /// Supremum over samples of an arbitrary scalar signal.
    pub fn sup_of<F: Fn(&Sample) -> f64>(&self, f: F) -> f64 {
        self.samples.iter().map(f).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_p(&self) -> f64 {
        self.samples.iter().map(|s| s.p).fold(f64::INFINITY, f64::min)
    }

    /// Largest one-step increase of the Lyapunov-like signal `V_L`.
    pub fn max_vl_step_increase(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| w[1].v_l - w[0].v_l)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn switch_count(&self) -> usize {
        self.samples.iter().filter(|s| s.switched).count()
    }
}

/// Finite-differenced time derivative of the desired regressor, second-order
/// one-sided at the left edge so evaluation never leaves `t >= 0`.
pub(crate) fn yd_dot_fd(
    model: &SystemModel,
    reference: &ReferenceTrajectory,
    t: f64,
    h: f64,
) -> DMatrix<f64> {
    if t >= h {
        (yd_matrix(model, reference, t + h) - yd_matrix(model, reference, t - h)) / (2.0 * h)
    } else {
        (yd_matrix(model, reference, t) * -3.0
            + yd_matrix(model, reference, t + h) * 4.0
            - yd_matrix(model, reference, t + 2.0 * h))
            / (2.0 * h)
    }
}

/// Bounded drift term `N_B = Y_d θ' + Y_d' (θ - θ̂)` entering the
/// certificate dynamics; `Y_d'` by finite difference with step `dt/100`.
pub fn drift_term(scenario: &Scenario, t: f64, theta_hat: &DVector<f64>) -> DVector<f64> {
    let h = scenario.dt / 100.0;
    let yd = yd_matrix(&scenario.model, &scenario.reference, t);
    let yd_dot = yd_dot_fd(&scenario.model, &scenario.reference, t, h);
    yd * scenario.model.eval_theta_dot(t) + yd_dot * (scenario.model.eval_theta(t) - theta_hat)
}

/// Discontinuous selections frozen across one step.
struct Frozen {
    sgn_e: DVector<f64>,
    branch: Branch,
}

struct Derivs {
    x: DVector<f64>,
    theta_hat: DVector<f64>,
    mu: DVector<f64>,
    p: f64,
}

fn augmented(matrix: DMatrix<f64>, n: usize, m: usize) -> AugmentedRegressor {
    AugmentedRegressor { matrix, n, m }
}

/// Branch/signum decision at the start of a step (and at recorded samples).
fn decide(scenario: &Scenario, t: f64, x: &DVector<f64>, theta_hat: &DVector<f64>) -> Result<Frozen> {
    let e = x - scenario.reference.xd(t);
    let sgn_e = controller::sign_vector(&e);
    let branch = match scenario.controller {
        ControllerKind::Rise => {
            let yd = augmented(
                yd_matrix(&scenario.model, &scenario.reference, t),
                scenario.model.n,
                scenario.model.m,
            );
            let l0 = controller::lambda0_from_sign(&yd, &sgn_e, &scenario.gains)?;
            let (_, branch) = controller::project_update(theta_hat, &l0, &scenario.gains)?;
            branch
        }
        _ => Branch::Interior,
    };
    Ok(Frozen { sgn_e, branch })
}

/// Right-hand side of the coupled closed-loop system under a frozen
/// signum/branch selection.
fn derivs(
    scenario: &Scenario,
    t: f64,
    x: &DVector<f64>,
    theta_hat: &DVector<f64>,
    mu: &DVector<f64>,
    frozen: &Frozen,
) -> Result<Derivs> {
    let (n, m) = scenario.dims();
    let reference = &scenario.reference;
    let model = &scenario.model;
    let xd = reference.xd(t);
    let xd_dot = reference.xd_dot(t);
    let e = x - &xd;
    let theta = model.eval_theta(t);
    let y = y_matrix(model, x, t);

    match scenario.controller {
        ControllerKind::Rise => {
            let gains = &scenario.gains;
            let yd = augmented(yd_matrix(model, reference, t), n, m);
            let u = controller::control_input(&yd, theta_hat, &e, &xd_dot, mu, gains.alpha)?;
            let x_dot = &y * &theta + &u;
            let r = &x_dot - &xd_dot + &e * gains.alpha;

            let l0 = controller::lambda0_from_sign(&yd, &frozen.sgn_e, gains)?;
            let (theta_hat_dot, mu_d) = match frozen.branch {
                Branch::Interior => {
                    let mu_d = controller::mu_dot(Branch::Interior, &r, &yd, &l0, &l0, gains);
                    (l0, mu_d)
                }
                Branch::Boundary => {
                    let l1 = controller::lambda1(theta_hat, &l0)?;
                    let mu_d = controller::mu_dot(Branch::Boundary, &r, &yd, &l0, &l1, gains);
                    (l1, mu_d)
                }
            };

            let h = scenario.dt / 100.0;
            let yd_dot = yd_dot_fd(model, reference, t, h);
            let drift = &yd.matrix * model.eval_theta_dot(t) + yd_dot * (&theta - theta_hat);
            let p_dot = -r.dot(&(&drift - &frozen.sgn_e * gains.beta));

            Ok(Derivs { x: x_dot, theta_hat: theta_hat_dot, mu: mu_d, p: p_dot })
        }
        ControllerKind::SigmaMod | ControllerKind::Gradient => {
            let sigma = match scenario.controller {
                ControllerKind::Gradient => 0.0,
                _ => scenario.baseline_gains.sigma,
            };
            let y_aug = augmented(y.clone(), n, m);
            let (u, theta_hat_dot) = baselines::sigma_mod_step(
                &e,
                &y_aug,
                theta_hat,
                &xd_dot,
                &scenario.baseline_gains,
                sigma,
            )?;
            let x_dot = y * theta + u;
            Ok(Derivs { x: x_dot, theta_hat: theta_hat_dot, mu: DVector::zeros(n), p: 0.0 })
        }
        ControllerKind::Robust => {
            let u = baselines::robust_step(x, &e, &xd_dot, &frozen.sgn_e, &scenario.baseline_gains);
            let x_dot = y * theta + u;
            Ok(Derivs {
                x: x_dot,
                theta_hat: DVector::zeros(n + m),
                mu: DVector::zeros(n),
                p: 0.0,
            })
        }
    }
}

fn rk4(scenario: &Scenario, state: &SimState, frozen: &Frozen) -> Result<SimState> {
    let dt = scenario.dt;
    let half = dt / 2.0;
    let s = state;

    let k1 = derivs(scenario, s.t, &s.x, &s.theta_hat, &s.mu, frozen)?;
    let k2 = derivs(
        scenario,
        s.t + half,
        &(&s.x + &k1.x * half),
        &(&s.theta_hat + &k1.theta_hat * half),
        &(&s.mu + &k1.mu * half),
        frozen,
    )?;
    let k3 = derivs(
        scenario,
        s.t + half,
        &(&s.x + &k2.x * half),
        &(&s.theta_hat + &k2.theta_hat * half),
        &(&s.mu + &k2.mu * half),
        frozen,
    )?;
    let k4 = derivs(
        scenario,
        s.t + dt,
        &(&s.x + &k3.x * dt),
        &(&s.theta_hat + &k3.theta_hat * dt),
        &(&s.mu + &k3.mu * dt),
        frozen,
    )?;

    let sixth = dt / 6.0;
    Ok(SimState {
        t: s.t + dt,
        x: &s.x + (&k1.x + &k2.x * 2.0 + &k3.x * 2.0 + &k4.x) * sixth,
        theta_hat: &s.theta_hat
            + (&k1.theta_hat + &k2.theta_hat * 2.0 + &k3.theta_hat * 2.0 + &k4.theta_hat) * sixth,
        mu: &s.mu + (&k1.mu + &k2.mu * 2.0 + &k3.mu * 2.0 + &k4.mu) * sixth,
        p: s.p + (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p) * sixth,
    })
}

/// Retract the estimate onto the projection ball if the discrete step left
/// it; the metric projection onto the ball never enlarges the step.
fn retract(theta_hat: &mut DVector<f64>, theta_bar: f64) {
    let norm = theta_hat.norm();
    if norm > theta_bar {
        *theta_hat *= theta_bar / norm;
    }
}

fn check_finite(state: &SimState, step: usize) -> Result<()> {
    let bad = !state.x.iter().all(|v| v.is_finite())
        || !state.theta_hat.iter().all(|v| v.is_finite())
        || !state.mu.iter().all(|v| v.is_finite())
        || !state.p.is_finite();
    if bad {
        return Err(Error::Divergence {
            step,
            t: state.t,
            what: "non-finite state component".into(),
        });
    }
    let worst = state.x.norm().max(state.theta_hat.norm()).max(state.mu.norm()).max(state.p.abs());
    if worst > DIVERGENCE_CUTOFF {
        return Err(Error::Divergence {
            step,
            t: state.t,
            what: format!("state norm {worst:.3e} exceeds cutoff {DIVERGENCE_CUTOFF:.0e}"),
        });
    }
    Ok(())
}

/// Advances the state by one step, freezing the signum/branch selections at
/// the step start.
pub fn step(scenario: &Scenario, state: &SimState) -> Result<SimState> {
    let frozen = decide(scenario, state.t, &state.x, &state.theta_hat)?;
    let mut next = rk4(scenario, state, &frozen)?;
    if scenario.controller == ControllerKind::Rise {
        retract(&mut next.theta_hat, scenario.gains.theta_bar);
    }
    Ok(next)
}

/// Initial value of the integral certificate,
/// `P(0) = β Σ|e_i(0)| - e(0)ᵀ N_B(0)`.
fn initial_p(scenario: &Scenario) -> f64 {
    let e0 = &scenario.x0 - scenario.reference.xd(0.0);
    let drift0 = drift_term(scenario, 0.0, &scenario.theta_hat0);
    scenario.gains.beta * e0.iter().map(|v| v.abs()).sum::<f64>() - e0.dot(&drift0)
}

fn record_sample(
    scenario: &Scenario,
    state: &SimState,
    frozen: &Frozen,
    switched: bool,
) -> Result<Sample> {
    let (n, m) = scenario.dims();
    let t = state.t;
    let xd = scenario.reference.xd(t);
    let xd_dot = scenario.reference.xd_dot(t);
    let e = &state.x - &xd;
    let theta = scenario.model.eval_theta(t);
    let y = y_matrix(&scenario.model, &state.x, t);

    let u = match scenario.controller {
        ControllerKind::Rise => {
            let yd = augmented(yd_matrix(&scenario.model, &scenario.reference, t), n, m);
            controller::control_input(&yd, &state.theta_hat, &e, &xd_dot, &state.mu, scenario.gains.alpha)?
        }
        ControllerKind::SigmaMod | ControllerKind::Gradient => {
            let sigma = match scenario.controller {
                ControllerKind::Gradient => 0.0,
                _ => scenario.baseline_gains.sigma,
            };
            let y_aug = augmented(y.clone(), n, m);
            baselines::sigma_mod_step(&e, &y_aug, &state.theta_hat, &xd_dot, &scenario.baseline_gains, sigma)?.0
        }
        ControllerKind::Robust => {
            baselines::robust_step(&state.x, &e, &xd_dot, &frozen.sgn_e, &scenario.baseline_gains)
        }
    };

    let x_dot = &y * &theta + &u;
    let r = &x_dot - &xd_dot + &e * scenario.gains.alpha;
    let v_l = 0.5 * r.norm_squared() + 0.5 * e.norm_squared() + state.p;

    Ok(Sample {
        t,
        x: state.x.clone(),
        x_d: xd,
        e,
        r,
        u,
        theta: theta.clone(),
        theta_hat: state.theta_hat.clone(),
        theta_tilde: theta - &state.theta_hat,
        mu: state.mu.clone(),
        p: state.p,
        v_l,
        branch: frozen.branch,
        switched,
    })
}

/// Integrates the scenario from `t = 0` to its horizon, recording every
/// step. The number of steps is `round(t_end / dt)`; a zero horizon yields a
/// record with the single initial sample.
pub fn run(scenario: &Scenario) -> Result<TrajectoryRecord> {
    scenario.validate()?;
    let (n, m) = scenario.dims();
    let steps = (scenario.t_end / scenario.dt).round() as usize;

    let mut state = SimState {
        t: 0.0,
        x: scenario.x0.clone(),
        theta_hat: scenario.theta_hat0.clone(),
        mu: DVector::zeros(n),
        p: match scenario.controller {
            ControllerKind::Rise => initial_p(scenario),
            _ => 0.0,
        },
    };

    let mut samples = Vec::with_capacity(steps + 1);
    let mut prev_branch: Option<Branch> = None;

    for i in 0..=steps {
        let frozen = decide(scenario, state.t, &state.x, &state.theta_hat)?;
        let switched = prev_branch.is_some_and(|b| b != frozen.branch);
        samples.push(record_sample(scenario, &state, &frozen, switched)?);
        prev_branch = Some(frozen.branch);
        if i == steps {
            break;
        }
        let mut next = rk4(scenario, &state, &frozen).map_err(|err| match err {
            Error::IllConditioned { context, cond } => Error::Divergence {
                step: i,
                t: state.t,
                what: format!("ill-conditioned {context} (cond {cond:.3e})"),
            },
            other => other,
        })?;
        if scenario.controller == ControllerKind::Rise {
            retract(&mut next.theta_hat, scenario.gains.theta_bar);
        }
        next.t = (i + 1) as f64 * scenario.dt;
        check_finite(&next, i)?;
        state = next;
    }

    Ok(TrajectoryRecord {
        scenario: scenario.name.clone(),
        controller: scenario.controller,
        n,
        m,
        dt: scenario.dt,
        samples,
    })
}

/// Runs several scenarios; data-parallel across runs when the `parallel`
/// feature is enabled. Each run is internally sequential.
pub fn run_many(scenarios: &[Scenario]) -> Vec<Result<TrajectoryRecord>> {
    #[cfg(feature = "parallel")]
    {
        scenarios.par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        scenarios.iter().map(run).collect()
    }
}

/// CSV column names for a record of dimensions `(n, m)`: time, the vector
/// signals componentwise, then the certificate, Lyapunov value, branch, and
/// switch flag.
pub fn csv_header(n: usize, m: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    let push_vec = |cols: &mut Vec<String>, base: &str, len: usize| {
        for i in 1..=len {
            cols.push(format!("{base}{i}"));
        }
    };
    push_vec(&mut cols, "x", n);
    push_vec(&mut cols, "xd", n);
    push_vec(&mut cols, "e", n);
    push_vec(&mut cols, "r", n);
    push_vec(&mut cols, "u", n);
    push_vec(&mut cols, "theta", n + m);
    push_vec(&mut cols, "theta_hat", n + m);
    push_vec(&mut cols, "theta_tilde", n + m);
    push_vec(&mut cols, "mu", n);
    cols.push("P".to_string());
    cols.push("V_L".to_string());
    cols.push("branch".to_string());
    cols.push("switching_flag".to_string());
    cols
}

/// Writes the record as RFC-4180 CSV, one row per sample.
pub fn write_csv<W: std::io::Write>(record: &TrajectoryRecord, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(record.n, record.m))?;
    let mut row: Vec<String> = Vec::new();
    for s in &record.samples {
        row.clear();
        row.push(fmt(s.t));
        for v in [&s.x, &s.x_d, &s.e, &s.r, &s.u, &s.theta, &s.theta_hat, &s.theta_tilde, &s.mu] {
            row.extend(v.iter().map(|&c| fmt(c)));
        }
        row.push(fmt(s.p));
        row.push(fmt(s.v_l));
        row.push(match s.branch {
            Branch::Interior => "0".to_string(),
            Branch::Boundary => "1".to_string(),
        });
        row.push(if s.switched { "1".to_string() } else { "0".to_string() });
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn fmt(v: f64) -> String {
    // shortest representation that parses back to the same bits
    format!("{v}")
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::InvalidConfig(format!("csv: {err}"))
    }
}

pub fn to_csv_string(record: &TrajectoryRecord) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(record, &mut buf)?;
    String::from_utf8(buf)
        .map_err(|_| Error::InvariantViolation("csv output was not utf-8".into()))
}
