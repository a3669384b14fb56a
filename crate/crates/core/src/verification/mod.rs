//! Post-processing of solver output: wet-set extraction, growth-rate fits
//! and checks against the analytic bounds.

mod checks;
mod rate;
mod support;

pub use checks::{
    bound_extent, check_containment, check_front_sandwich, check_static_bound, lateral_asymmetry, ContainmentReport, ContainmentSample,
    SandwichReport, StaticBoundReport, STATIC_BOUND_TOL,
};
pub use rate::{early_time_cutoff, fit_growth, secant_slope, RateFit, MIN_FIT_SAMPLES};
pub use support::{extract_support, threshold_sweep, Axis, SupportTrace};

use crate::front::FrontError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerificationError {
    #[error("support threshold must be positive, got {0}")]
    InvalidThreshold(f64),
    #[error("field at t = {t} does not match the grid")]
    GridMismatch { t: f64 },
    /// No sinks exist, so moisture cannot vanish; this indicates a solver
    /// defect.
    #[error("internal error: no wet cell at t = {t}")]
    EmptySupport { t: f64 },
    #[error("fit window [{t_min}, {t_max}] is invalid")]
    InvalidWindow { t_min: f64, t_max: f64 },
    #[error("fit window holds {samples} usable samples, need {required}")]
    WindowTooSmall { samples: usize, required: usize },
    #[error(transparent)]
    Front(#[from] FrontError),
}
