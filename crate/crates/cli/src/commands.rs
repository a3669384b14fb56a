use crate::output::{encode_fields, num, sha256_hex, OutDir};
use crate::verify::{verify_scenario, run_scenario, Verified};
use crate::{parse_preset, resolve_scenario, AnalyzeArgs, CliError, EnvelopeArgs, RunArgs, ScenariosArgs, Source, VerifyArgs};
use richards_front::constitutive::{PresetP, SoilModel};
use richards_front::exec::Execution;
use richards_front::front::{classify, critical_times, region_bound, Direction, FrontAnalyzer, FrontCurve, RegionBounds, RegionShape};
use richards_front::scenario::{Scenario, SoilSpec};
use richards_front::solver::{Grid, RunOutput};
use richards_front::verification::{bound_extent, Axis};
use serde::Serialize;

fn front_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

/// Soil, `R₀` and a hashable description of the analytic inputs.
#[derive(Debug, Clone, Serialize)]
struct AnalyticSource {
    soil: SoilSpec,
    u_star: f64,
    r0: f64,
}

fn analytic_source(source: &Source) -> Result<(SoilModel, AnalyticSource), CliError> {
    let src = match (&source.preset, &source.config) {
        (Some(name), None) => AnalyticSource { soil: SoilSpec::preset(parse_preset(name)?), u_star: 1.0, r0: 1.0 },
        (None, Some(path)) => {
            let s = Scenario::load(path)?;
            AnalyticSource { soil: s.soil, u_star: s.u_star, r0: s.r0 }
        }
        (None, None) => return Err(CliError::Config("one of --preset or --config is required".into())),
        (Some(_), Some(_)) => return Err(CliError::Config("--preset and --config are mutually exclusive".into())),
    };
    let model = src.soil.build(src.u_star).map_err(front_err)?;
    Ok((model, src))
}

fn config_hash<T: Serialize>(value: &T) -> String {
    sha256_hex(serde_json::to_string(value).expect("serialisable").as_bytes())
}

/// Front curves for each direction, sampled at `times`.
pub fn front_curves(model: &SoilModel, r0: f64, directions: &[Direction], times: &[f64]) -> Result<Vec<FrontCurve>, CliError> {
    let analyzer = FrontAnalyzer::new(model.clone()).map_err(front_err)?;
    directions.iter().map(|&d| analyzer.curve(d, r0, times).map_err(front_err)).collect()
}

pub fn sample_times(t_max: f64, samples: usize) -> Vec<f64> {
    let n = samples.max(2) - 1;
    (0..=n).map(|k| t_max * k as f64 / n as f64).collect()
}

#[derive(Serialize)]
struct CurveSummary {
    omega: f64,
    t_critical: Option<f64>,
    t_zero: Option<f64>,
    case: Option<richards_front::front::UpwardCase>,
    curvature_jump: Option<f64>,
    final_radius: f64,
}

pub fn analyze(a: &AnalyzeArgs) -> Result<String, CliError> {
    if !(a.t_max >= 0.0 && a.t_max.is_finite()) {
        return Err(CliError::Config(format!("--t-max must be non-negative, got {}", a.t_max)));
    }
    let (model, src) = analytic_source(&a.source)?;
    let directions = match a.omega {
        Some(w) if w.is_finite() => vec![Direction::new(w)],
        Some(w) => return Err(CliError::Config(format!("--omega must be finite, got {w}"))),
        None => Direction::fan(a.directions.max(1)),
    };
    let times = sample_times(a.t_max, a.samples);
    let curves = front_curves(&model, src.r0, &directions, &times)?;
    let mut out = OutDir::create(&a.source.out_dir)?;
    let rows = curves.iter().flat_map(|c| {
        (0..c.times.len()).map(move |i| vec![num(c.omega.omega), num(c.times[i]), num(c.radius[i]), num(c.speed[i]), c.regime[i].as_str().to_string()])
    });
    out.write_csv("front_curves.csv", &["omega", "t", "radius", "speed", "regime"], rows)?;
    let summary: Vec<CurveSummary> = curves
        .iter()
        .map(|c| CurveSummary {
            omega: c.omega.omega,
            t_critical: c.t_critical,
            t_zero: c.t_zero,
            case: c.case,
            curvature_jump: c.curvature_jump,
            final_radius: *c.radius.last().expect("at least two samples"),
        })
        .collect();
    out.write_json("front_summary.json", &summary)?;
    let hash = config_hash(&(&src, a.omega, a.directions, a.t_max, a.samples));
    let dir = out.root().display().to_string();
    out.finish("analyze", &hash)?;
    Ok(format!("analyze: {} direction(s), {} samples each, written to {dir}", curves.len(), times.len()))
}

fn shape_name(shape: &RegionShape) -> &'static str {
    match shape {
        RegionShape::CylinderHalfBall { .. } => "cylinder_half_ball",
        RegionShape::TwoBallHull { .. } => "two_ball_hull",
        RegionShape::StationaryEnvelope { .. } => "stationary_envelope",
    }
}

pub fn region_bounds(model: &SoilModel, r0: f64, times: &[f64]) -> Result<Vec<RegionBounds>, CliError> {
    times.iter().map(|&t| region_bound(model, r0, t).map_err(front_err)).collect()
}

pub fn envelope(a: &EnvelopeArgs) -> Result<String, CliError> {
    let (model, src) = analytic_source(&a.source)?;
    let bounds = region_bounds(&model, src.r0, &a.times)?;
    let cut = src.r0 + model.u_star();
    let mut rows = Vec::new();
    for b in &bounds {
        for (label, bound) in [("lower", &b.lower), ("upper", &b.upper)] {
            for (i, p) in bound.polyline(a.points, cut).iter().enumerate() {
                rows.push(vec![num(b.t), label.to_string(), shape_name(&bound.shape).to_string(), i.to_string(), num(p[0]), num(p[1])]);
            }
        }
    }
    let mut out = OutDir::create(&a.source.out_dir)?;
    out.write_csv("region_bounds.csv", &["t", "bound", "shape", "index", "x_perp", "x_n"], rows)?;
    out.write_json("region_bounds.json", &bounds)?;
    let shapes: Vec<&str> = bounds.iter().map(|b| shape_name(&b.upper.shape)).collect();
    let hash = config_hash(&(&src, &a.times, a.points));
    let dir = out.root().display().to_string();
    out.finish("envelope", &hash)?;
    Ok(format!("envelope: {} time(s), upper bounds {:?}, written to {dir}", bounds.len(), shapes))
}

/// Measured and analytic extents at each output time.
fn extents_rows(run: &RunOutput, model: &SoilModel, r0: f64) -> Result<Vec<Vec<String>>, CliError> {
    let output_times: Vec<f64> = run.fields.iter().map(|f| f.t).collect();
    let mut rows = Vec::new();
    for d in run.diagnostics.iter().filter(|d| output_times.contains(&d.t)) {
        let b = region_bound(model, r0, d.t).map_err(front_err)?;
        let e = d.extents;
        let pick = |f: fn(&richards_front::solver::Extents) -> f64| e.as_ref().map(f).unwrap_or(f64::NAN);
        rows.push(vec![
            num(d.t),
            num(pick(|e| e.up)),
            num(pick(|e| e.down)),
            num(pick(|e| e.right)),
            num(pick(|e| e.left)),
            num(bound_extent(&b, model, r0, Axis::Up)),
            num(bound_extent(&b, model, r0, Axis::Down)),
            num(bound_extent(&b, model, r0, Axis::Right)),
        ]);
    }
    Ok(rows)
}

fn write_run(out: &mut OutDir, s: &Scenario, model: &SoilModel, run: &RunOutput) -> Result<(), CliError> {
    out.write_json("scenario.json", s)?;
    out.write_bytes("fields.bin", &encode_fields(run.grid.dimension, run.grid.cells_per_axis, run.grid.half_width, &run.fields))?;
    let diag = run.diagnostics.iter().map(|d| {
        vec![num(d.t), num(d.dt), d.newton_iterations.to_string(), num(d.residual), num(d.mass), num(d.boundary_exchange), num(d.max_v), num(d.min_v)]
    });
    out.write_csv("diagnostics.csv", &["t", "dt", "newton_iterations", "residual", "mass", "boundary_exchange", "max_v", "min_v"], diag)?;
    let output_times: Vec<f64> = run.fields.iter().map(|f| f.t).collect();
    let rows = extents_rows(run, model, s.r0)?;
    out.write_csv("extents.csv", &["t", "up", "down", "right", "left", "bound_up", "bound_down", "bound_lateral"], rows)?;
    #[derive(Serialize)]
    struct Summary<'a> {
        grid: &'a Grid,
        steps: usize,
        newton_iterations: usize,
        initial_mass: f64,
        mass_defect: f64,
        output_times: &'a [f64],
    }
    out.write_json(
        "run_summary.json",
        &Summary {
            grid: &run.grid,
            steps: run.diagnostics.len().saturating_sub(1),
            newton_iterations: run.diagnostics.iter().map(|d| d.newton_iterations).sum(),
            initial_mass: run.initial_mass,
            mass_defect: run.mass_defect(),
            output_times: &output_times,
        },
    )?;
    Ok(())
}

pub fn simulate(a: &RunArgs) -> Result<String, CliError> {
    let s = resolve_scenario(&a.source, a.quick, a.dimension as usize, a.t_max)?;
    let (model, run) = run_scenario(&s, Execution::best())?;
    let mut out = OutDir::create(&a.source.out_dir)?;
    write_run(&mut out, &s, &model, &run)?;
    let dir = out.root().display().to_string();
    out.finish("simulate", &config_hash(&s))?;
    Ok(format!("simulate: {} snapshots, mass defect {:e}, written to {dir}", run.fields.len(), run.mass_defect()))
}

/// Writes the verification artifacts of a finished run.
pub fn write_verification(out: &mut OutDir, v: &Verified) -> Result<(), CliError> {
    write_run(out, &v.scenario, &v.model, &v.run)?;
    out.write_json("verification.json", &v.report)?;
    let rows = v.report.containment.samples.iter().map(|c| {
        vec![num(c.t), c.wet_cells.to_string(), c.outside_cells.to_string(), num(c.worst_excess), num(c.worst_cell[0]), num(c.worst_cell[1]), num(v.report.containment.slack)]
    });
    out.write_csv("containment.csv", &["t", "wet_cells", "outside_cells", "worst_excess", "worst_x_perp", "worst_x_n", "slack"], rows)?;
    let mut sweep = Vec::new();
    for tr in &v.report.sweep {
        for i in 0..tr.len() {
            sweep.push(vec![num(tr.threshold), num(tr.times[i]), num(tr.up[i]), num(tr.down[i]), num(tr.right[i]), num(tr.left[i])]);
        }
    }
    out.write_csv("threshold_sweep.csv", &["threshold", "t", "up", "down", "right", "left"], sweep)?;
    let checks = v.report.checks.iter().map(|c| vec![c.name.to_string(), c.pass.to_string(), num(c.value), num(c.limit)]);
    out.write_csv("checks.csv", &["check", "pass", "value", "limit"], checks)?;
    Ok(())
}

pub fn verify(a: &VerifyArgs) -> Result<String, CliError> {
    let s = resolve_scenario(&a.run.source, a.run.quick, a.run.dimension as usize, a.run.t_max)?;
    let v = verify_scenario(&s, a.continuation, Execution::best())?;
    let mut out = OutDir::create(&a.run.source.out_dir)?;
    write_verification(&mut out, &v)?;
    let dir = out.root().display().to_string();
    out.finish("verify", &config_hash(&s))?;
    let lines: Vec<String> = v
        .report
        .checks
        .iter()
        .map(|c| format!("  {:<22} {}  value {:.3e}  limit {:.3e}", c.name, if c.pass { "PASS" } else { "FAIL" }, c.value, c.limit))
        .collect();
    let body = format!("verify: written to {dir}\n{}", lines.join("\n"));
    if v.report.pass {
        Ok(body)
    } else {
        let failed: Vec<&str> = v.report.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
        println!("{body}");
        Err(CliError::VerificationFailed(failed.join(", ")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PresetInfo {
    pub name: &'static str,
    pub formula: &'static str,
    pub p_flat: f64,
    pub p_sharp: f64,
    pub q_star: f64,
    pub case: String,
    pub t_sharp_down: f64,
    pub t_flat_up: f64,
    pub t_zero_up: Option<f64>,
}

pub fn preset_table() -> Result<Vec<PresetInfo>, CliError> {
    PresetP::ALL
        .iter()
        .map(|&p| {
            let m = SoilModel::from_preset(p, 1.0).map_err(front_err)?;
            let down = critical_times(&m, Direction::down()).map_err(front_err)?;
            let up = critical_times(&m, Direction::up()).map_err(front_err)?;
            Ok(PresetInfo {
                name: p.name(),
                formula: p.formula(),
                p_flat: m.p_flat(),
                p_sharp: m.p_sharp(),
                q_star: m.q_star(),
                case: format!("{:?}", classify(&m).map_err(front_err)?),
                t_sharp_down: down.t_critical.unwrap_or(f64::NAN),
                t_flat_up: up.t_critical.unwrap_or(f64::NAN),
                t_zero_up: up.t_zero,
            })
        })
        .collect()
}

pub fn scenarios(a: &ScenariosArgs) -> Result<String, CliError> {
    let table = preset_table()?;
    let mut lines = vec![format!("{:<10} {:<14} {:>6} {:>6} {:>8} {:>7} {:>9} {:>9} {:>9}", "preset", "P(v)", "P_flat", "P_sharp", "Q*", "case", "T_sharp", "T_flat", "T_zero")];
    for r in &table {
        lines.push(format!(
            "{:<10} {:<14} {:>6.3} {:>6.3} {:>8.4} {:>7} {:>9.4} {:>9.4} {:>9}",
            r.name,
            r.formula,
            r.p_flat,
            r.p_sharp,
            r.q_star,
            r.case,
            r.t_sharp_down,
            r.t_flat_up,
            r.t_zero_up.map(|t| format!("{t:.4}")).unwrap_or_else(|| "-".into())
        ));
    }
    lines.push("power_law  f = C_f u^(p+1), g = C_g u^(q+1), P = C_f (p+1)/C_g u^(p-q-1); admissible for p > 0 and -1 < q < 2p - 1".into());
    if let Some(dir) = &a.out_dir {
        let mut out = OutDir::create(dir)?;
        for p in PresetP::ALL {
            for d in [1, 2] {
                out.write_json(&format!("{}_quick_{d}d.json", p.name()), &Scenario::quick(p, d))?;
            }
        }
        out.write_json("presets.json", &table)?;
        out.finish("scenarios", &config_hash(&table))?;
        lines.push(format!("scenario files written to {}", dir.display()));
    }
    Ok(lines.join("\n"))
}
