use crate::CliError;
use richards_front::constitutive::SoilModel;
use richards_front::exec::Execution;
use richards_front::scenario::{Scenario, ScenarioError};
use richards_front::solver::{continuation, ContinuationReport, RunOutput};
use richards_front::verification::{
    check_containment, check_front_sandwich, check_static_bound, early_time_cutoff, extract_support, fit_growth, lateral_asymmetry, secant_slope,
    threshold_sweep, Axis, ContainmentReport, RateFit, SandwichReport, StaticBoundReport, SupportTrace,
};
use serde::Serialize;

/// Regularisation values of the continuation study.
pub const CONTINUATION_EPSILONS: [f64; 3] = [1e-5, 1e-6, 1e-7];

/// Thresholds of the sensitivity sweep, relative to `u*`.
pub const SWEEP_THRESHOLDS: [f64; 3] = [1e-4, 1e-6, 1e-8];

/// Relative tolerance of the mass balance.
pub const CONSERVATION_TOL: f64 = 1e-8;

/// Tolerance of the bounds `0 ≤ v ≤ v*`.
pub const RANGE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub value: f64,
    pub limit: f64,
}

impl Check {
    fn at_most(name: &'static str, value: f64, limit: f64) -> Self {
        Self { name, pass: value <= limit, value, limit }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RateSummary {
    /// `[max(T/2, 4 (Δx/P♯)²), T]`.
    pub late_window: (f64, f64),
    /// Last quarter of the horizon.
    pub final_window: (f64, f64),
    pub lateral: Option<RateFit>,
    pub downward: Option<RateFit>,
    pub downward_secant: Option<f64>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub pass: bool,
    pub checks: Vec<Check>,
    pub dx: f64,
    pub v_star: f64,
    pub mass_defect: f64,
    pub min_v: f64,
    pub max_v: f64,
    pub containment: ContainmentReport,
    pub sandwich: SandwichReport,
    pub static_bound: StaticBoundReport,
    pub rates: RateSummary,
    pub sweep: Vec<SupportTrace>,
    pub continuation: Option<ContinuationReport>,
}

pub struct Verified {
    pub scenario: Scenario,
    pub model: SoilModel,
    pub run: RunOutput,
    pub trace: SupportTrace,
    pub report: VerificationReport,
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

pub fn run_scenario(s: &Scenario, exec: Execution) -> Result<(SoilModel, RunOutput), CliError> {
    s.run(exec).map_err(|e| match e {
        ScenarioError::Solver(e) => runtime(e),
        other => CliError::from(other),
    })
}

pub fn rate_summary(trace: &SupportTrace, model: &SoilModel, r0: f64, horizon: f64) -> RateSummary {
    let cutoff = early_time_cutoff(trace.dx, model.p_sharp());
    let late_window = ((0.5 * horizon).max(cutoff), horizon);
    let final_window = (0.75 * horizon, horizon);
    let mut errors = Vec::new();
    let mut keep = |r: Result<RateFit, _>, what: &str| match r {
        Ok(f) => Some(f),
        Err(e) => {
            errors.push(format!("{what}: {e}"));
            None
        }
    };
    let lateral = if trace.dimension == 2 { keep(fit_growth(trace, Axis::Right, r0, late_window), "lateral") } else { None };
    let downward = keep(fit_growth(trace, Axis::Down, r0, late_window), "downward");
    let downward_secant = match secant_slope(trace, Axis::Down, final_window) {
        Ok(s) => Some(s),
        Err(e) => {
            errors.push(format!("downward secant: {e}"));
            None
        }
    };
    RateSummary { late_window, final_window, lateral, downward, downward_secant, errors }
}

/// Runs the scenario and every check on its output.
pub fn verify_scenario(s: &Scenario, with_continuation: bool, exec: Execution) -> Result<Verified, CliError> {
    let (model, run) = run_scenario(s, exec)?;
    let threshold = s.absolute_threshold();
    let grid = run.grid;
    let dx = grid.dx();
    let trace = extract_support(&run.fields, &grid, &model, threshold, exec).map_err(runtime)?;
    let containment = check_containment(&trace, &grid, &model, s.r0, exec).map_err(runtime)?;
    let sandwich = check_front_sandwich(&trace, &model, s.r0);
    let static_bound = check_static_bound(&run.fields, &grid, &model, s.r0, exec);
    let sweep_abs: Vec<f64> = SWEEP_THRESHOLDS.iter().map(|t| t * s.u_star).collect();
    let sweep = threshold_sweep(&run.fields, &grid, &model, &sweep_abs, exec).map_err(runtime)?;
    let rates = rate_summary(&trace, &model, s.r0, s.horizon);
    let min_v = run.diagnostics.iter().map(|d| d.min_v).fold(f64::INFINITY, f64::min);
    let max_v = run.diagnostics.iter().map(|d| d.max_v).fold(f64::NEG_INFINITY, f64::max);
    let v_star = model.v_star();
    let mass_defect = run.mass_defect();

    let mut checks = vec![
        Check::at_most("containment", containment.worst_excess, containment.slack),
        Check::at_most("front_sandwich", sandwich.worst_excess, sandwich.slack),
        Check::at_most("static_bound", static_bound.max_violation, richards_front::verification::STATIC_BOUND_TOL),
        Check::at_most("upward_extent", trace.up.iter().copied().fold(f64::NEG_INFINITY, f64::max), s.r0 + s.u_star + dx),
        Check::at_most("max_principle", max_v - v_star, RANGE_TOL),
        Check::at_most("positivity", -min_v, RANGE_TOL),
        Check::at_most("mass_conservation", mass_defect, CONSERVATION_TOL),
    ];
    if grid.dimension == 2 {
        checks.push(Check::at_most("lateral_symmetry", lateral_asymmetry(&trace), dx));
        if model.p_sharp() > 0.0 {
            let (lat, down) = (rates.lateral.map(|f| f.exponent), rates.downward.map(|f| f.exponent));
            let gap = match (lat, down) {
                (Some(l), Some(d)) => d - l,
                _ => f64::NAN,
            };
            checks.push(Check { name: "rate_separation", pass: gap > 0.0, value: gap, limit: 0.0 });
        }
    }
    let continuation = if with_continuation {
        let init = s.initial(&model, &grid).map_err(runtime)?;
        let rep = continuation(&model, &grid, &s.solver, &init, s.horizon, threshold, &CONTINUATION_EPSILONS, exec).map_err(runtime)?;
        let last = rep.l1_differences.last().copied().unwrap_or(f64::NAN);
        checks.push(Check { name: "continuation_monotone", pass: rep.monotone, value: last, limit: rep.l1_differences[0] });
        Some(rep)
    } else {
        None
    };
    let pass = checks.iter().all(|c| c.pass);
    let report = VerificationReport {
        pass,
        checks,
        dx,
        v_star,
        mass_defect,
        min_v,
        max_v,
        containment,
        sandwich,
        static_bound,
        rates,
        sweep,
        continuation,
    };
    Ok(Verified { scenario: s.clone(), model, run, trace, report })
}
