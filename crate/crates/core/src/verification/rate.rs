use super::{Axis, SupportTrace, VerificationError};
use serde::Serialize;

/// Fewest samples accepted by [`fit_growth`].
pub const MIN_FIT_SAMPLES: usize = 8;

/// Least-squares fit `R(t) - R₀ ≈ slope · t^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub exponent: f64,
    pub slope: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

/// Times below `4 (Δx / P♯)²` move in whole-cell jumps and are excluded
/// from fits.
pub fn early_time_cutoff(dx: f64, p_sharp: f64) -> f64 {
    4.0 * (dx / p_sharp).powi(2)
}

/// Fits `log(R(t) - R₀)` against `log t` over the samples in `window`.
/// Samples with `R(t) ≤ R₀` carry no growth information and are skipped.
pub fn fit_growth(trace: &SupportTrace, axis: Axis, r0: f64, window: (f64, f64)) -> Result<RateFit, VerificationError> {
    let (t_min, t_max) = window;
    if !(t_min > 0.0 && t_max > t_min) {
        return Err(VerificationError::InvalidWindow { t_min, t_max });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = trace
        .times
        .iter()
        .zip(trace.extents(axis))
        .filter(|(t, r)| **t >= t_min && **t <= t_max && **r > r0)
        .map(|(t, r)| (t.ln(), (r - r0).ln()))
        .unzip();
    if xs.len() < MIN_FIT_SAMPLES {
        return Err(VerificationError::WindowTooSmall { samples: xs.len(), required: MIN_FIT_SAMPLES });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(VerificationError::WindowTooSmall { samples: 1, required: MIN_FIT_SAMPLES });
    }
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - exponent * x).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(RateFit { exponent, slope: intercept.exp(), r_squared, window, samples: xs.len() })
}

/// `(R(t_b) - R(t_a)) / (t_b - t_a)` between the first and last samples
/// inside `window`.
pub fn secant_slope(trace: &SupportTrace, axis: Axis, window: (f64, f64)) -> Result<f64, VerificationError> {
    let inside: Vec<(f64, f64)> = trace
        .times
        .iter()
        .zip(trace.extents(axis))
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(t, r)| (*t, *r))
        .collect();
    match (inside.first(), inside.last()) {
        (Some(a), Some(b)) if b.0 > a.0 => Ok((b.1 - a.1) / (b.0 - a.0)),
        _ => Err(VerificationError::WindowTooSmall { samples: inside.len(), required: 2 }),
    }
}
