//! Finite-volume solver for the regularised Kirchhoff-transformed problem
//!
//! ```text
//! (ε v + ĝ_δ(v))_t = Δv + ∂_N f̂(v⁺ + δ)     in (-M, M)^N,   v = 0 on the boundary,
//! ```
//!
//! discretised by cell-centred finite volumes, implicit Euler in time and
//! full upwinding of the gravity flux (which always points along `-e_N`).

mod coefficients;
mod compare;
mod grid;
mod linear;
mod run;
mod step;

pub use compare::{ORDERING_TOL, comparison_check, continuation, supersolution_check, ComparisonReport, ContinuationReport, SupersolutionReport};
pub use grid::{initial_bump, Grid, InitialProfile, SolutionField};
pub use run::{simulate, Extents, RunOutput, StepDiagnostics};
pub use step::{step, StepStats};

use crate::constitutive::SoilModel;
use crate::front::FrontError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("half-width {half_width} does not exceed the required {required}")]
    DomainTooSmall { half_width: f64, required: f64 },
    #[error("R0 = {r0} must be positive and below the half-width {half_width}")]
    R0TooLarge { r0: f64, half_width: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("Newton iteration failed at t = {t} (residual {residual:e})")]
    NewtonDiverged { t: f64, residual: f64 },
    #[error("maximum principle violated at t = {t}: v in [{min:e}, {max:e}], v* = {v_star}")]
    MaxPrincipleViolation { t: f64, min: f64, max: f64, v_star: f64 },
    #[error("wet region reached within two cells of the boundary at t = {t}")]
    SupportReachedBoundary { t: f64 },
    #[error("runs are not comparable: {0}")]
    IncompatibleRuns(String),
    #[error(transparent)]
    Front(#[from] FrontError),
}

/// Numerical parameters of the regularised scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub dt: f64,
    /// Absolute per-cell bound on the residual `ε Δv + Δĝ_δ - dt (fluxes)`.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Upwind (`true`) or centred gravity flux.
    pub upwind: bool,
    /// Relative tolerance of the inner BiCGSTAB solve.
    pub linear_tol: f64,
    /// Maximum number of successive time-step halvings after a failed step.
    pub max_halvings: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            delta: 1e-8,
            dt: 1e-3,
            newton_tol: 1e-12,
            newton_max_iter: 30,
            upwind: true,
            linear_tol: 1e-12,
            max_halvings: 5,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self, grid: &Grid, model: &SoilModel) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::InvalidConfig(m));
        if !(self.delta > 0.0 && self.delta < self.epsilon && self.epsilon < 1.0) {
            return bad(format!("need 0 < delta < epsilon < 1, got delta = {}, epsilon = {}", self.delta, self.epsilon));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.newton_tol > 0.0) || self.newton_max_iter == 0 {
            return bad("Newton tolerance and iteration cap must be positive".into());
        }
        if !(self.linear_tol > 0.0 && self.linear_tol < 1.0) {
            return bad(format!("linear tolerance must lie in (0, 1), got {}", self.linear_tol));
        }
        if self.dt * model.p_sharp() > grid.dx() {
            return bad(format!("dt * P_sharp = {} exceeds the cell size {}", self.dt * model.p_sharp(), grid.dx()));
        }
        Ok(())
    }
}
