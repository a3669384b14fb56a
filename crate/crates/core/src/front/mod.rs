//! Analytic bounds on the moving wetting front.
//!
//! Directions are `e_ω = sin ω e_⊥ - cos ω e_N` with `e_N` pointing up, so
//! `ω = 0` is straight down, `ω = π` straight up and `ω = ±π/2` lateral.
//! Every quantity here depends on the soil only through `P`.

mod curve;
mod decay;
mod gamma;
mod region;

pub use curve::{front_curve, FrontAnalyzer, FrontCurve, Regime};
pub use decay::{upward_decay_rate, DecayBound, DecayCondition};
pub use gamma::HalfSpace;
pub use region::{envelope_samples, region_bound, RegionBound, RegionBounds, RegionShape, ENVELOPE_MIN_COS};

use crate::constitutive::SoilModel;
use crate::numeric::quadrature::{integrate_singular, Rule};
use crate::numeric::{brent, RootError};
use gamma::{Kernel, TOL};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// Cosines below this magnitude are treated as exactly lateral.
pub const LATERAL_COS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrontError {
    #[error("speed {c} is not above the critical speed {critical}")]
    SpeedBelowCritical { c: f64, critical: f64 },
    #[error("argument {z} outside the domain z > {lo}")]
    DomainError { z: f64, lo: f64 },
    #[error("argument {s} exceeds the supremum {sup}")]
    OutOfRange { s: f64, sup: f64 },
    #[error("R0 must be positive, got {0}")]
    NonPositiveR0(f64),
    #[error("times must be finite, non-negative and ascending")]
    InvalidTimes,
    #[error("P is unbounded on (0, u*]")]
    UnboundedP,
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("root finding failed: {0}")]
    Root(String),
}

impl From<RootError> for FrontError {
    fn from(e: RootError) -> Self {
        FrontError::Root(e.to_string())
    }
}

/// A unit direction `e_ω` in the `(e_⊥, e_N)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub omega: f64,
    pub cos_omega: f64,
    pub sin_omega: f64,
}

impl Direction {
    /// Normalises `omega` into `[-π/2, 3π/2)`.
    pub fn new(omega: f64) -> Self {
        let w = (omega + PI / 2.0).rem_euclid(2.0 * PI) - PI / 2.0;
        let (mut s, mut c) = w.sin_cos();
        if c.abs() < LATERAL_COS {
            c = 0.0;
            s = s.signum();
        }
        Self { omega: w, cos_omega: c, sin_omega: s }
    }

    pub fn down() -> Self {
        Self::new(0.0)
    }

    pub fn up() -> Self {
        Self::new(PI)
    }

    pub fn lateral() -> Self {
        Self::new(PI / 2.0)
    }

    pub fn half_space(&self) -> HalfSpace {
        if self.cos_omega >= 0.0 {
            HalfSpace::Lower
        } else {
            HalfSpace::Upper
        }
    }

    pub fn is_lateral(&self) -> bool {
        self.cos_omega == 0.0
    }

    /// Evenly spaced fan of `n` directions covering `[-π/2, 3π/2)`.
    pub fn fan(n: usize) -> Vec<Self> {
        (0..n).map(|k| Self::new(-PI / 2.0 + 2.0 * PI * k as f64 / n as f64)).collect()
    }
}

fn require_bounded(model: &SoilModel) -> Result<(), FrontError> {
    if model.p_sharp().is_finite() {
        Ok(())
    } else {
        Err(FrontError::UnboundedP)
    }
}

/// `c*_ω`: the slowest admissible traveling-wave speed in direction `ω`.
pub fn critical_speed(model: &SoilModel, omega: Direction) -> f64 {
    let c = omega.cos_omega;
    if c > 0.0 {
        model.p_sharp() * c
    } else if c < 0.0 {
        -model.p_flat() * c.abs()
    } else {
        0.0
    }
}

/// `Q_{c,ω}(u) = ∫_0^u P / (c - P cos ω)`.
pub fn q_profile(model: &SoilModel, c: f64, omega: Direction, u: f64) -> Result<f64, FrontError> {
    require_bounded(model)?;
    let critical = critical_speed(model, omega);
    if !(c > critical) {
        return Err(FrontError::SpeedBelowCritical { c, critical });
    }
    let u = u.clamp(0.0, model.u_star());
    if u == 0.0 {
        return Ok(0.0);
    }
    let cos = omega.cos_omega;
    let f = |v: f64| {
        let p = model.p(v);
        p / (c - p * cos)
    };
    let peak = if cos > 0.0 { model.v_sharp() } else { model.v_flat() };
    Ok(integrate_singular(Rule::Kronrod, &f, 0.0, u, &[peak], TOL).value_or_inf())
}

/// Traveling-wave profile `U_{c,ω}(z) = Q_{c,ω}⁻¹(z)`, saturating at `u*`.
pub fn traveling_wave_profile(model: &SoilModel, c: f64, omega: Direction, z: f64) -> Result<f64, FrontError> {
    let top = q_profile(model, c, omega, model.u_star())?;
    if z <= 0.0 {
        return Ok(0.0);
    }
    if z >= top {
        return Ok(model.u_star());
    }
    let f = |u: f64| q_profile(model, c, omega, u).unwrap_or(f64::NAN) - z;
    Ok(brent(f, 0.0, model.u_star(), 1e-15 * model.u_star())?)
}

/// `Γ₀(z) = ∫ P / (z - P)²` for `z > P♯`.
pub fn gamma0(model: &SoilModel, z: f64) -> Result<f64, FrontError> {
    require_bounded(model)?;
    let k = Kernel::new(model, HalfSpace::Lower);
    let y = z - k.z_crit;
    if !(y > 0.0) {
        return Err(FrontError::DomainError { z, lo: k.z_crit });
    }
    Ok(k.gamma(y))
}

/// `Γ̂₀(z) = ∫ P / (z + P)²` for `z > -P♭`.
pub fn gamma0_hat(model: &SoilModel, z: f64) -> Result<f64, FrontError> {
    require_bounded(model)?;
    let k = Kernel::new(model, HalfSpace::Upper);
    let y = z - k.z_crit;
    if !(y > 0.0) {
        return Err(FrontError::DomainError { z, lo: k.z_crit });
    }
    Ok(k.gamma(y))
}

/// `Γ_ω(s) = ∫ P / (s - P cos ω)²` evaluated directly, without the scaling
/// identity.
pub fn gamma_omega(model: &SoilModel, omega: Direction, s: f64) -> Result<f64, FrontError> {
    require_bounded(model)?;
    let critical = critical_speed(model, omega);
    if !(s > critical) {
        return Err(FrontError::DomainError { z: s, lo: critical });
    }
    let cos = omega.cos_omega;
    let f = |v: f64| {
        let p = model.p(v);
        let d = s - p * cos;
        p / (d * d)
    };
    let peak = if cos > 0.0 { model.v_sharp() } else { model.v_flat() };
    Ok(integrate_singular(Rule::Kronrod, &f, 0.0, model.u_star(), &[peak], TOL).value_or_inf())
}

/// Inverse of `Γ₀` (`hat = false`) or `Γ̂₀` (`hat = true`) at `s > 0`,
/// bracketed by the sandwich bounds.
pub fn gamma0_inverse(model: &SoilModel, s: f64, hat: bool) -> Result<f64, FrontError> {
    require_bounded(model)?;
    let half = if hat { HalfSpace::Upper } else { HalfSpace::Lower };
    let k = Kernel::new(model, half);
    if !(s > 0.0 && s.is_finite()) {
        return Err(FrontError::DomainError { z: s, lo: 0.0 });
    }
    let sup = k.critical_value();
    match k.invert(s, sup)? {
        Some(y) => Ok(k.z_crit + y),
        None => Err(FrontError::OutOfRange { s, sup }),
    }
}

/// Critical times for one direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalTimes {
    /// `T♯` (lower half) or `T♭` (upper half); `None` for lateral directions.
    pub t_critical: Option<f64>,
    /// `T⁰ = Γ̂₀(0) / cos² ω` (upper half only).
    pub t_zero: Option<f64>,
}

/// `T♯`, `T♭` and `T⁰`; divergent integrals are reported as `+inf`.
pub fn critical_times(model: &SoilModel, omega: Direction) -> Result<CriticalTimes, FrontError> {
    require_bounded(model)?;
    if omega.is_lateral() {
        return Ok(CriticalTimes { t_critical: None, t_zero: None });
    }
    let c2 = omega.cos_omega * omega.cos_omega;
    let k = Kernel::new(model, omega.half_space());
    let t_critical = Some(k.critical_value() / c2);
    let t_zero = match omega.half_space() {
        HalfSpace::Lower => None,
        HalfSpace::Upper => Some(k.gamma(model.p_flat()) / c2),
    };
    Ok(CriticalTimes { t_critical, t_zero })
}

/// Soil classification for the upper half-space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UpwardCase {
    /// `P♭ > 0`: the upward front reverses.
    Case1,
    /// `P♭ = 0`, `∫ 1/P = ∞`: stationary limit approached asymptotically.
    Case2a,
    /// `P♭ = 0`, `∫ 1/P < ∞`: stationary limit reached in finite time.
    Case2b,
}

pub fn classify(model: &SoilModel) -> Result<UpwardCase, FrontError> {
    require_bounded(model)?;
    if model.p_flat() > 0.0 {
        return Ok(UpwardCase::Case1);
    }
    let k = Kernel::new(model, HalfSpace::Upper).critical_value();
    Ok(if k.is_finite() { UpwardCase::Case2b } else { UpwardCase::Case2a })
}
