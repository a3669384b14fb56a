use super::{simulate, RunOutput, SolutionField, SolverConfig, SolverError};
use crate::constitutive::SoilModel;
use crate::exec::Execution;
use crate::front::{q_profile, traveling_wave_profile, Direction};
use super::Grid;
use serde::Serialize;

/// Pass threshold for ordering checks.
pub const ORDERING_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub times: Vec<f64>,
    /// `max_k (v^a_k - v^b_k)⁺` at each output time.
    pub violation: Vec<f64>,
    pub max_violation: f64,
    pub pass: bool,
}

/// Checks `v^a ≤ v^b` cellwise at every common output time.
pub fn comparison_check(a: &RunOutput, b: &RunOutput) -> Result<ComparisonReport, SolverError> {
    if a.grid != b.grid {
        return Err(SolverError::IncompatibleRuns("grids differ".into()));
    }
    if a.config != b.config {
        return Err(SolverError::IncompatibleRuns("solver configurations differ".into()));
    }
    if a.fields.len() != b.fields.len() || a.fields.iter().zip(&b.fields).any(|(x, y)| x.t != y.t) {
        return Err(SolverError::IncompatibleRuns("output times differ".into()));
    }
    let mut times = Vec::new();
    let mut violation = Vec::new();
    for (fa, fb) in a.fields.iter().zip(&b.fields) {
        times.push(fa.t);
        violation.push(fa.v.iter().zip(&fb.v).map(|(x, y)| (x - y).max(0.0)).fold(0.0, f64::max));
    }
    let max_violation = violation.iter().copied().fold(0.0, f64::max);
    Ok(ComparisonReport { times, violation, max_violation, pass: max_violation <= ORDERING_TOL })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupersolutionReport {
    pub omega: f64,
    pub speed: f64,
    pub shift: f64,
    /// `max_k (u_k - u_ω(x_k + shift e_ω, t))⁺` at each output time.
    pub violation: Vec<f64>,
    pub max_violation: f64,
    pub pass: bool,
}

/// Compares a run against the traveling wave
/// `u_ω(x, t) = U_{c,ω}(c t + R_ω - <x, e_ω>)`, `R_ω = R₀ + Q_{c,ω}(u*)`,
/// evaluated one cell ahead of each cell centre. The check passes when no
/// cell exceeds the wave by more than `tol`.
pub fn supersolution_check(run: &RunOutput, model: &SoilModel, r0: f64, omega: Direction, c: f64, tol: f64) -> Result<SupersolutionReport, SolverError> {
    let q_top = q_profile(model, c, omega, model.u_star())?;
    let r_omega = r0 + q_top;
    let shift = run.grid.dx();
    let mut violation = Vec::with_capacity(run.fields.len());
    for field in &run.fields {
        let u = field.u(model);
        let mut worst = 0.0f64;
        for (k, &uk) in u.iter().enumerate() {
            if uk <= 0.0 {
                continue;
            }
            let (xp, xn) = run.grid.coords(k);
            let z = c * field.t + r_omega - xp * omega.sin_omega + xn * omega.cos_omega + shift;
            let bound = if z >= q_top { model.u_star() } else { traveling_wave_profile(model, c, omega, z)? };
            worst = worst.max(uk - bound);
        }
        violation.push(worst.max(0.0));
    }
    let max_violation = violation.iter().copied().fold(0.0, f64::max);
    Ok(SupersolutionReport { omega: omega.omega, speed: c, shift, violation, max_violation, pass: max_violation <= tol })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationReport {
    pub epsilons: Vec<f64>,
    /// `‖v_{ε_i} - v_{ε_{i+1}}‖_{L¹}` of the final fields.
    pub l1_differences: Vec<f64>,
    pub monotone: bool,
}

/// Repeats a run at each `ε` and reports the L¹ distance between
/// successive final fields.
#[allow(clippy::too_many_arguments)]
pub fn continuation(
    model: &SoilModel,
    grid: &Grid,
    cfg: &SolverConfig,
    initial: &SolutionField,
    horizon: f64,
    threshold: f64,
    epsilons: &[f64],
    exec: Execution,
) -> Result<ContinuationReport, SolverError> {
    if epsilons.len() < 2 {
        return Err(SolverError::InvalidConfig("continuation needs at least two values of epsilon".into()));
    }
    let mut finals = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let c = SolverConfig { epsilon: eps, ..*cfg };
        let run = simulate(model, grid, &c, initial, horizon, &[horizon], threshold, exec)?;
        finals.push(run.final_field().v.clone());
    }
    let vol = grid.cell_volume();
    let l1_differences: Vec<f64> = finals
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).sum::<f64>() * vol)
        .collect();
    let monotone = l1_differences.windows(2).all(|d| d[1] < d[0]);
    Ok(ContinuationReport { epsilons: epsilons.to_vec(), l1_differences, monotone })
}
