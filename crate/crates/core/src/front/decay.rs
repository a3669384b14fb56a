use super::{classify, Direction, FrontError, HalfSpace, UpwardCase};
use crate::constitutive::{SoilModel, SCAN_POINTS};
use serde::Serialize;

/// Growth condition on `(P⁻¹)'` that produced a decay bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum DecayCondition {
    /// `(P⁻¹)'(x) ≤ α`: exponential decay.
    Bounded { alpha: f64 },
    /// `(P⁻¹)'(x) ≤ α x^(-1/m)`: decay like `t^(-m)`.
    Power { alpha: f64, m: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayBound {
    pub t: f64,
    /// Upper bound on `Ṙ^ω(t)`.
    pub bound: f64,
    pub condition: DecayCondition,
}

fn derivative(model: &SoilModel, v: f64) -> f64 {
    model.p_prime(v).unwrap_or_else(|| {
        let h = 1e-7 * model.u_star();
        let lo = (v - h).max(0.0);
        let hi = (v + h).min(model.u_star());
        (model.p(hi) - model.p(lo)) / (hi - lo)
    })
}

/// Upper bound on the upward front speed for soils with `P(0) = 0` and
/// `∫ 1/P = ∞`.
pub fn upward_decay_rate(model: &SoilModel, omega: Direction, t: f64) -> Result<DecayBound, FrontError> {
    if omega.half_space() != HalfSpace::Upper {
        return Err(FrontError::NotApplicable("direction is not in the upper half-space".into()));
    }
    match classify(model)? {
        UpwardCase::Case2a => {}
        other => return Err(FrontError::NotApplicable(format!("decay bounds need Case 2a, soil is {other:?}"))),
    }
    if !(t > 0.0) {
        return Err(FrontError::InvalidTimes);
    }
    let u = model.u_star();
    let grid: Vec<f64> = (0..=SCAN_POINTS).map(|k| u * k as f64 / SCAN_POINTS as f64).collect();
    if grid.windows(2).any(|w| model.p(w[1]) <= model.p(w[0])) {
        return Err(FrontError::NotApplicable("P is not strictly increasing".into()));
    }
    let c = omega.cos_omega.abs();
    let c2 = c * c;
    let p_top = model.p(u);
    // (P⁻¹)'(P(v)) = 1 / P'(v).
    let alpha0 = grid.iter().map(|&v| 1.0 / derivative(model, v)).fold(0.0f64, f64::max);
    if alpha0.is_finite() {
        let bound = p_top * c / ((t * c2 / alpha0).exp() - 1.0);
        return Ok(DecayBound { t, bound, condition: DecayCondition::Bounded { alpha: alpha0 } });
    }
    // P ~ v^k near 0 gives (P⁻¹)'(x) ~ x^(1/k - 1), i.e. m = k / (k - 1).
    let v0 = u * 2f64.powi(-20);
    let k = (model.p(2.0 * v0) / model.p(v0)).log2();
    if !(k > 1.0) {
        return Err(FrontError::NotApplicable("(P⁻¹)' admits no power bound".into()));
    }
    let m = k / (k - 1.0);
    let alpha = grid[1..]
        .iter()
        .map(|&v| model.p(v).powf(1.0 / m) / derivative(model, v))
        .fold(0.0f64, f64::max);
    if !alpha.is_finite() {
        return Err(FrontError::NotApplicable("(P⁻¹)' admits no power bound".into()));
    }
    let bound = c * (alpha * m / (t * c2)).powf(m);
    Ok(DecayBound { t, bound, condition: DecayCondition::Power { alpha, m } })
}
