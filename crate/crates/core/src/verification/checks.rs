use super::{Axis, SupportTrace, VerificationError};
use crate::constitutive::SoilModel;
use crate::exec::Execution;
use crate::front::{region_bound, RegionBounds};
use crate::solver::{Grid, SolutionField};
use serde::Serialize;

/// Tolerance on `u` for the static upper bound.
pub const STATIC_BOUND_TOL: f64 = 1e-8;

const RAY_SAMPLES: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContainmentSample {
    pub t: f64,
    pub wet_cells: usize,
    /// Wet cells whose excess over the bound exceeds the slack.
    pub outside_cells: usize,
    /// Largest excess over the bound among wet cells.
    pub worst_excess: f64,
    /// `(x_⊥, x_N)` of that cell.
    pub worst_cell: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContainmentReport {
    pub slack: f64,
    pub samples: Vec<ContainmentSample>,
    pub worst_excess: f64,
    pub pass: bool,
}

/// Checks every wet cell against both region bounds at each time, allowing
/// one cell width.
pub fn check_containment(
    trace: &SupportTrace,
    grid: &Grid,
    model: &SoilModel,
    r0: f64,
    exec: Execution,
) -> Result<ContainmentReport, VerificationError> {
    let slack = grid.dx();
    let bounds: Vec<RegionBounds> = trace.times.iter().map(|&t| region_bound(model, r0, t)).collect::<Result<_, _>>()?;
    let samples = exec.map(trace.len(), |i| {
        let mut s = ContainmentSample { t: trace.times[i], wet_cells: 0, outside_cells: 0, worst_excess: f64::NEG_INFINITY, worst_cell: [f64::NAN; 2] };
        for (k, _) in trace.masks[i].iter().enumerate().filter(|(_, w)| **w) {
            let (xp, xn) = grid.coords(k);
            let e = bounds[i].excess(xp, xn);
            s.wet_cells += 1;
            if e > slack {
                s.outside_cells += 1;
            }
            if e > s.worst_excess {
                s.worst_excess = e;
                s.worst_cell = [xp, xn];
            }
        }
        s
    });
    let worst_excess = samples.iter().map(|s| s.worst_excess).fold(f64::NEG_INFINITY, f64::max);
    let pass = samples.iter().all(|s| s.outside_cells == 0);
    Ok(ContainmentReport { slack, samples, worst_excess, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub times: Vec<f64>,
    pub downward_extent: Vec<f64>,
    /// `R₀ + t P♯ + 2 sqrt(Q* t)`.
    pub upper_envelope: Vec<f64>,
    pub slack: f64,
    pub worst_excess: f64,
    pub pass: bool,
}

/// Numerical downward extent against `R₀ + t P♯ + 2 sqrt(Q* t) + Δx`.
pub fn check_front_sandwich(trace: &SupportTrace, model: &SoilModel, r0: f64) -> SandwichReport {
    let upper_envelope: Vec<f64> = trace.times.iter().map(|&t| r0 + t * model.p_sharp() + 2.0 * (model.q_star() * t).sqrt()).collect();
    let worst_excess = trace.down.iter().zip(&upper_envelope).map(|(d, b)| d - b).fold(f64::NEG_INFINITY, f64::max);
    SandwichReport {
        times: trace.times.clone(),
        downward_extent: trace.down.clone(),
        upper_envelope,
        slack: trace.dx,
        worst_excess,
        pass: worst_excess <= trace.dx,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StaticBoundReport {
    /// `max_k (u_k - (u* + R₀ - x_N + Δx/2)⁺)⁺` at each time.
    pub violation: Vec<f64>,
    pub max_violation: f64,
    pub pass: bool,
}

/// `u ≤ (u* + R₀ - x_N)⁺` at every cell and time. Cell values are averages,
/// so each is compared with the bound at the lower face of its cell.
pub fn check_static_bound(fields: &[SolutionField], grid: &Grid, model: &SoilModel, r0: f64, exec: Execution) -> StaticBoundReport {
    let top = model.u_star() + r0 + 0.5 * grid.dx();
    let violation = exec.map(fields.len(), |i| {
        let u = fields[i].u(model);
        u.iter()
            .enumerate()
            .map(|(k, &uk)| uk - (top - grid.coords(k).1).max(0.0))
            .fold(0.0, f64::max)
    });
    let max_violation = violation.iter().copied().fold(0.0, f64::max);
    StaticBoundReport { violation, max_violation, pass: max_violation <= STATIC_BOUND_TOL }
}

/// Distance from the origin to the far edge of `bounds` along `axis`, or
/// NaN if no point of the ray lies inside.
pub fn bound_extent(bounds: &RegionBounds, model: &SoilModel, r0: f64, axis: Axis) -> f64 {
    let (ep, en) = axis.unit();
    let t = bounds.t;
    let reach = r0 + model.u_star() + t * model.p_sharp() + 2.0 * (model.q_star() * t).sqrt() + 1.0;
    let inside = |s: f64| bounds.contains(s * ep, s * en);
    let Some(last) = (0..=RAY_SAMPLES).rev().map(|k| reach * k as f64 / RAY_SAMPLES as f64).find(|&s| inside(s)) else {
        return f64::NAN;
    };
    let (mut lo, mut hi) = (last, (last + reach / RAY_SAMPLES as f64).min(reach));
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Largest `|R_right(t) - R_left(t)|`.
pub fn lateral_asymmetry(trace: &SupportTrace) -> f64 {
    trace.right.iter().zip(&trace.left).map(|(r, l)| (r - l).abs()).fold(0.0, f64::max)
}
