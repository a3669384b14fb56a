//! Versioned JSON description of a simulation: soil, initial bump, grid,
//! solver settings and output schedule.

use crate::constitutive::{ConstitutiveError, PresetP, SoilModel};
use crate::exec::Execution;
use crate::solver::{initial_bump, simulate, Grid, InitialProfile, RunOutput, SolutionField, SolverConfig, SolverError};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

/// `M = AUTO_DOMAIN_FACTOR ×` the required half-width when `M` is omitted.
pub const AUTO_DOMAIN_FACTOR: f64 = 1.05;

/// Domain factor of the built-in quick and full scenarios. The extra room
/// keeps first-order upwind tails of linearly degenerate fronts away from
/// the boundary guard.
pub const PRESET_DOMAIN_FACTOR: f64 = 1.25;

/// Default support threshold relative to `u*`.
pub const DEFAULT_THRESHOLD: f64 = 1e-6;

/// Number of equally spaced output times when none are given.
pub const DEFAULT_OUTPUTS: usize = 40;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot access {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid scenario: {0}")]
    Validation(String),
    #[error(transparent)]
    Model(#[from] ConstitutiveError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SoilSpec {
    /// `f = C_f u^(p+1)`, `g = C_g u^(q+1)`.
    PowerLaw { c_f: f64, p: f64, c_g: f64, q: f64 },
    /// `P` given directly with `g(u) = u`: either a preset or `(v, P(v))`
    /// rows interpolated by a monotone cubic. Exactly one must be set.
    PStar {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        preset: Option<PresetP>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        table: Option<Vec<[f64; 2]>>,
    },
}

impl SoilSpec {
    pub fn preset(preset: PresetP) -> Self {
        SoilSpec::PStar { preset: Some(preset), table: None }
    }

    pub fn build(&self, u_star: f64) -> Result<SoilModel, ConstitutiveError> {
        match self {
            SoilSpec::PowerLaw { c_f, p, c_g, q } => SoilModel::from_power_law(*c_f, *p, *c_g, *q, u_star),
            SoilSpec::PStar { preset: Some(preset), table: None } => SoilModel::from_preset(*preset, u_star),
            SoilSpec::PStar { preset: None, table: Some(table) } => SoilModel::from_table(table, u_star),
            SoilSpec::PStar { .. } => Err(ConstitutiveError::InvalidParameter("p_star soil needs exactly one of `preset` and `table`".into())),
        }
    }
}

fn default_profile() -> InitialProfile {
    InitialProfile::Cap
}

fn default_threshold() -> f64 {
    DEFAULT_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub soil: SoilSpec,
    pub r0: f64,
    pub u_star: f64,
    /// Half-width `M` of the domain `(-M, M)^N`.
    #[serde(default)]
    pub half_width: Option<f64>,
    pub dimension: usize,
    pub cells: usize,
    #[serde(default = "default_profile")]
    pub profile: InitialProfile,
    #[serde(default)]
    pub solver: SolverConfig,
    pub horizon: f64,
    #[serde(default)]
    pub output_times: Vec<f64>,
    /// Support threshold as a multiple of `u*`.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

impl Scenario {
    fn from_preset(preset: PresetP, dimension: usize, cells: usize, dt: f64) -> Self {
        let horizon = 4.0;
        let mut s = Self {
            schema_version: SCHEMA_VERSION,
            preset: Some(preset.name().to_string()),
            soil: SoilSpec::preset(preset),
            r0: 1.0,
            u_star: 1.0,
            half_width: None,
            dimension,
            cells,
            profile: InitialProfile::Cap,
            solver: SolverConfig { dt, ..SolverConfig::default() },
            horizon,
            output_times: uniform_times(horizon, DEFAULT_OUTPUTS),
            threshold: DEFAULT_THRESHOLD,
        };
        let model = s.model().expect("presets are admissible");
        s.half_width = Some(PRESET_DOMAIN_FACTOR * Grid::required_half_width(&model, s.r0, s.horizon));
        s
    }

    /// 256 cells in 1D or 128² in 2D, `dt = 1e-3`, `T = 4`.
    pub fn quick(preset: PresetP, dimension: usize) -> Self {
        Self::from_preset(preset, dimension, if dimension == 1 { 256 } else { 128 }, 1e-3)
    }

    /// Twice the quick resolution in space and time.
    pub fn full(preset: PresetP, dimension: usize) -> Self {
        Self::from_preset(preset, dimension, if dimension == 1 { 512 } else { 256 }, 5e-4)
    }

    pub fn model(&self) -> Result<SoilModel, ConstitutiveError> {
        self.soil.build(self.u_star)
    }

    /// Half-width, falling back to the automatic choice.
    pub fn resolved_half_width(&self, model: &SoilModel) -> f64 {
        self.half_width.unwrap_or_else(|| AUTO_DOMAIN_FACTOR * Grid::required_half_width(model, self.r0, self.horizon))
    }

    pub fn grid(&self, model: &SoilModel) -> Result<Grid, SolverError> {
        Grid::new(self.dimension, self.resolved_half_width(model), self.cells)
    }

    pub fn initial(&self, model: &SoilModel, grid: &Grid) -> Result<SolutionField, SolverError> {
        initial_bump(grid, model, self.r0, self.profile)
    }

    /// Threshold on `u`.
    pub fn absolute_threshold(&self) -> f64 {
        self.threshold * self.u_star
    }

    /// Checks every invariant and fills in `M` and the output times.
    pub fn validate(mut self) -> Result<Self, ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Validation(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", self.schema_version));
        }
        for (name, x) in [("r0", self.r0), ("u_star", self.u_star)] {
            if !(x > 0.0 && x.is_finite()) {
                return bad(format!("{name} must be positive, got {x}"));
            }
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return bad(format!("threshold must lie in (0, 1), got {}", self.threshold));
        }
        if let Some(m) = self.half_width {
            if !(m > 0.0 && m.is_finite()) {
                return bad(format!("half_width must be positive, got {m}"));
            }
        }
        if let Some(t) = self.output_times.iter().find(|t| !(0.0..=self.horizon).contains(*t)) {
            return bad(format!("output time {t} outside [0, {}]", self.horizon));
        }
        let model = self.model()?;
        if !model.p_sharp().is_finite() || !model.q_star().is_finite() {
            return bad("P must be bounded on [0, u*] for simulation".into());
        }
        let grid = self.grid(&model)?;
        grid.check_horizon(&model, self.r0, self.horizon)?;
        if self.r0 >= grid.half_width {
            return Err(SolverError::R0TooLarge { r0: self.r0, half_width: grid.half_width }.into());
        }
        self.solver.validate(&grid, &model)?;
        self.half_width = Some(grid.half_width);
        if self.output_times.is_empty() {
            self.output_times = uniform_times(self.horizon, DEFAULT_OUTPUTS);
        }
        Ok(self)
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let raw: Scenario = serde_json::from_str(text)
            .map_err(|e| ScenarioError::Parse { line: e.line(), column: e.column(), message: e.to_string() })?;
        raw.validate()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serialises")
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), ScenarioError> {
        std::fs::write(path, self.to_json()).map_err(|e| ScenarioError::Io { path: path.display().to_string(), message: e.to_string() })
    }

    /// Builds the model, grid and initial field and runs the solver.
    pub fn run(&self, exec: Execution) -> Result<(SoilModel, RunOutput), ScenarioError> {
        let model = self.model()?;
        let grid = self.grid(&model)?;
        let init = self.initial(&model, &grid)?;
        let out = simulate(&model, &grid, &self.solver, &init, self.horizon, &self.output_times, self.absolute_threshold(), exec)?;
        Ok((model, out))
    }
}

/// `k T / n` for `k = 1..=n`.
pub fn uniform_times(horizon: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|k| horizon * k as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal(extra: &str) -> String {
        format!(
            r#"{{"schema_version": 1, "soil": {{"kind": "p_star", "preset": "p_const"}}, "r0": 1, "u_star": 1,
                "dimension": 1, "cells": 128, "horizon": 4{extra}}}"#
        )
    }

    #[test]
    fn omitted_half_width_is_auto() {
        let s = Scenario::from_json(&minimal("")).unwrap();
        assert!((s.half_width.unwrap() - 10.5).abs() < 1e-12);
        assert_eq!(s.output_times.len(), DEFAULT_OUTPUTS);
        assert_eq!(s.profile, InitialProfile::Cap);
        assert_eq!(s.threshold, DEFAULT_THRESHOLD);
    }

    #[test]
    fn preset_scenario_fields() {
        let s = Scenario::quick(PresetP::Const, 2);
        assert_eq!((s.r0, s.u_star, s.cells, s.horizon), (1.0, 1.0, 128, 4.0));
        assert_eq!(s.solver.dt, 1e-3);
        assert!(s.model().unwrap().p(0.3) == 1.0);
        assert_eq!(Scenario::quick(PresetP::Sqrt, 1).cells, 256);
        assert_eq!(Scenario::full(PresetP::Sqrt, 2).cells, 256);
        for p in PresetP::ALL {
            for d in [1, 2] {
                assert!(Scenario::quick(p, d).validate().is_ok());
            }
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let mut table = Scenario::quick(PresetP::Linear, 1);
        table.soil = SoilSpec::PStar { preset: None, table: Some(vec![[0.0, 1.0], [0.5, 0.75], [1.5, 0.1]]) };
        table.preset = None;
        let power = Scenario { soil: SoilSpec::PowerLaw { c_f: 0.5, p: 1.0, c_g: 1.0, q: 0.0 }, ..Scenario::quick(PresetP::Const, 2) };
        for s in [Scenario::quick(PresetP::InvSqrt, 2), table, power] {
            let s = s.validate().unwrap();
            assert_eq!(Scenario::from_json(&s.to_json()).unwrap(), s);
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = std::env::temp_dir().join(format!("scenario-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("s.json");
        let s = Scenario::quick(PresetP::Sqrt, 1);
        s.save(&path).unwrap();
        assert_eq!(Scenario::load(&path).unwrap(), s);
        assert!(matches!(Scenario::load(&dir.join("missing.json")), Err(ScenarioError::Io { .. })));
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn parse_errors_carry_position() {
        match Scenario::from_json("{\n  \"schema_version\": 1,\n  \"soil\": oops\n}") {
            Err(ScenarioError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match Scenario::from_json(&minimal(", \"bogus\": 1")) {
            Err(ScenarioError::Parse { message, .. }) => assert!(message.contains("bogus")),
            other => panic!("{other:?}"),
        }
        match Scenario::from_json(r#"{"schema_version": 1, "r0": 1}"#) {
            Err(ScenarioError::Parse { message, .. }) => assert!(message.contains("soil")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validation_names_the_invariant() {
        let cases = [
            (", \"half_width\": 9.0", "half-width"),
            (", \"output_times\": [5.0]", "output time"),
            (", \"threshold\": 0", "threshold"),
        ];
        for (extra, needle) in cases {
            let err = Scenario::from_json(&minimal(extra)).unwrap_err();
            assert!(err.to_string().contains(needle), "{err}");
        }
        let neg = minimal("").replace("\"r0\": 1", "\"r0\": -1");
        assert!(Scenario::from_json(&neg).unwrap_err().to_string().contains("r0"));
        let v2 = minimal("").replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(matches!(Scenario::from_json(&v2), Err(ScenarioError::Validation(_))));
        let bad_law = minimal("").replace(r#"{"kind": "p_star", "preset": "p_const"}"#, r#"{"kind": "power_law", "c_f": 1, "p": 0.5, "c_g": 1, "q": 0.5}"#);
        assert!(matches!(Scenario::from_json(&bad_law), Err(ScenarioError::Model(_))));
    }
}
