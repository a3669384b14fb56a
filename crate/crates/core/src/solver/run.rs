use super::step::{StepStats, Stepper};
use super::{Grid, SolutionField, SolverConfig, SolverError};
use crate::constitutive::SoilModel;
use crate::exec::Execution;
use serde::Serialize;

/// Extreme coordinates of cells with `u > threshold`, as distances from the
/// origin along `+e_N` (`up`), `-e_N` (`down`), `+e_⊥` and `-e_⊥`. `None`
/// when no cell is wet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extents {
    pub up: f64,
    pub down: f64,
    pub right: f64,
    pub left: f64,
}

impl Extents {
    /// Extents of the cells with `v > v_threshold`, and whether any of them
    /// lies within `margin` cells of the boundary.
    pub fn measure(grid: &Grid, v: &[f64], v_threshold: f64, margin: usize) -> (Option<Self>, bool) {
        let n = grid.cells_per_axis;
        let mut e = Extents { up: f64::NEG_INFINITY, down: f64::NEG_INFINITY, right: f64::NEG_INFINITY, left: f64::NEG_INFINITY };
        let mut any = false;
        let mut near = false;
        for (k, &vk) in v.iter().enumerate() {
            if vk <= v_threshold {
                continue;
            }
            any = true;
            let (i, j) = grid.split(k);
            let (xp, xn) = grid.coords(k);
            e.up = e.up.max(xn);
            e.down = e.down.max(-xn);
            e.right = e.right.max(xp);
            e.left = e.left.max(-xp);
            let close = |m: usize| m < margin || m + margin >= n;
            if close(j) || (grid.dimension == 2 && close(i)) {
                near = true;
            }
        }
        (any.then_some(e), near)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepDiagnostics {
    pub t: f64,
    pub dt: f64,
    pub newton_iterations: usize,
    pub residual: f64,
    /// `Σ (ε v + ĝ_δ(v)) Δx^N`.
    pub mass: f64,
    /// Cumulative mass exchanged through `∂Ω` since `t = 0`.
    pub boundary_exchange: f64,
    pub max_v: f64,
    pub min_v: f64,
    pub extents: Option<Extents>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutput {
    pub grid: Grid,
    pub config: SolverConfig,
    /// Snapshots at `t = 0` and at each requested output time.
    pub fields: Vec<SolutionField>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub initial_mass: f64,
    /// `f(threshold)`: cells with `v` above it count as wet.
    pub v_threshold: f64,
}

impl RunOutput {
    /// Largest `|mass(t) - mass(0) - exchange(t)| / mass(0)` over all steps.
    pub fn mass_defect(&self) -> f64 {
        self.diagnostics
            .iter()
            .map(|d| (d.mass - self.initial_mass - d.boundary_exchange).abs())
            .fold(0.0, f64::max)
            / self.initial_mass.abs().max(f64::MIN_POSITIVE)
    }

    pub fn final_field(&self) -> &SolutionField {
        self.fields.last().expect("at least the initial field")
    }
}

struct Driver<'a> {
    stepper: Stepper<'a>,
    v_threshold: f64,
    guess: Vec<f64>,
    exchange: f64,
    diagnostics: Vec<StepDiagnostics>,
}

impl Driver<'_> {
    fn record(&mut self, v: &[f64], t: f64, dt: f64, stats: StepStats) -> Result<(), SolverError> {
        self.exchange += stats.boundary_exchange;
        let exec = self.stepper.exec;
        let (extents, near) = Extents::measure(&self.stepper.grid, v, self.v_threshold, 2);
        self.diagnostics.push(StepDiagnostics {
            t,
            dt,
            newton_iterations: stats.newton_iterations,
            residual: stats.residual,
            mass: self.stepper.mass(v),
            boundary_exchange: self.exchange,
            max_v: exec.max(v.len(), |k| v[k]),
            min_v: -exec.max(v.len(), |k| -v[k]),
            extents,
        });
        if near {
            return Err(SolverError::SupportReachedBoundary { t });
        }
        Ok(())
    }

    /// Advances by `dt`, splitting into halves on Newton failure.
    fn advance(&mut self, v: Vec<f64>, t: f64, dt: f64, halvings: u32) -> Result<Vec<f64>, SolverError> {
        let saved = self.guess.clone();
        match self.stepper.advance(&v, t + dt, dt, &mut self.guess) {
            Ok((next, stats)) => {
                self.record(&next, t + dt, dt, stats)?;
                Ok(next)
            }
            Err(SolverError::NewtonDiverged { .. }) if halvings < self.stepper.cfg.max_halvings => {
                self.guess = saved;
                let half = 0.5 * dt;
                let mid = self.advance(v, t, half, halvings + 1)?;
                self.advance(mid, t + half, half, halvings + 1)
            }
            Err(e) => Err(e),
        }
    }
}

/// Runs the scheme from `initial` to `horizon`, storing snapshots at the
/// requested times. Steps are shortened uniformly within each interval
/// between output times so that every snapshot lies on a step.
pub fn simulate(
    model: &SoilModel,
    grid: &Grid,
    cfg: &SolverConfig,
    initial: &SolutionField,
    horizon: f64,
    output_times: &[f64],
    threshold: f64,
    exec: Execution,
) -> Result<RunOutput, SolverError> {
    cfg.validate(grid, model)?;
    if initial.v.len() != grid.len() || !initial.is_finite() {
        return Err(SolverError::InvalidGrid("initial field does not match the grid".into()));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(SolverError::InvalidConfig(format!("horizon must be non-negative, got {horizon}")));
    }
    if !(threshold > 0.0) {
        return Err(SolverError::InvalidConfig(format!("support threshold must be positive, got {threshold}")));
    }
    let mut targets: Vec<f64> = output_times.iter().copied().filter(|&t| t > 0.0 && t <= horizon).collect();
    if output_times.iter().any(|&t| !(0.0..=horizon).contains(&t)) {
        return Err(SolverError::InvalidConfig("output times must lie in [0, horizon]".into()));
    }
    targets.sort_by(f64::total_cmp);
    targets.dedup();
    let stepper = Stepper::new(*grid, model, *cfg, exec);
    let initial_mass = stepper.mass(&initial.v);
    let v_threshold = model.f(threshold);
    let mut driver = Driver { stepper, v_threshold, guess: vec![f64::NAN; grid.len()], exchange: 0.0, diagnostics: Vec::new() };
    driver.record(&initial.v, initial.t, 0.0, StepStats::default())?;
    let mut fields = vec![SolutionField { t: 0.0, v: initial.v.clone() }];
    let mut v = initial.v.clone();
    let mut t = 0.0;
    for &target in &targets {
        let n = ((target - t) / cfg.dt * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let h = (target - t) / n as f64;
        for s in 0..n {
            let t0 = t + s as f64 * h;
            v = driver.advance(v, t0, h, 0)?;
        }
        t = target;
        fields.push(SolutionField { t, v: v.clone() });
    }
    Ok(RunOutput { grid: *grid, config: *cfg, fields, diagnostics: driver.diagnostics, initial_mass, v_threshold })
}
