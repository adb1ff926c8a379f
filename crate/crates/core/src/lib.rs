//! Closed-loop simulation of adaptive tracking controllers for control-affine
//! plants whose uncertain parameters vary with time.
//!
//! The library provides:
//!
//! * plant/reference/scenario definitions with analytic derivative bounds
//!   ([`model`]),
//! * the augmented regressor that folds the exogenous disturbance into the
//!   parameter vector ([`regressor`]),
//! * a continuous adaptive controller whose update law combines a signum of
//!   the tracking error with a projection onto a parameter ball, plus the
//!   auxiliary integral term that cancels the projection side effect
//!   ([`controller`]),
//! * comparison controllers: leakage-modified gradient adaptation, plain
//!   gradient adaptation, and a worst-case robust law ([`baselines`]),
//! * a deterministic fixed-step integrator with per-step frozen switching
//!   and full trajectory recording ([`sim`]),
//! * numeric verification of the stability certificates: gain condition,
//!   integral certificate nonnegativity, Lyapunov decrease, projection
//!   safety, and update-rate bounds ([`analysis`]).
//!
//! Batch evaluations (bound-estimation grids, randomized matrix draws,
//! multi-controller runs) run data-parallel when the `parallel` feature is
//! enabled (default) and fall back to sequential loops otherwise.

pub mod analysis;
pub mod baselines;
pub mod config;
pub mod controller;
pub mod error;
pub mod model;
pub mod regressor;
pub mod sim;
pub mod sweep;

pub use config::ScenarioConfig;
pub use error::{Error, Result};
pub use model::{ControllerKind, ParameterBounds, ReferenceTrajectory, Scenario, SystemModel};
pub use sim::{run, TrajectoryRecord};
