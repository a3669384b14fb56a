use super::VerificationError;
use crate::constitutive::SoilModel;
use crate::exec::Execution;
use crate::solver::{Grid, SolutionField};
use serde::Serialize;

/// Selects one of the four directional extents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// `+e_N`.
    Up,
    /// `-e_N`.
    Down,
    /// `+e_⊥`.
    Right,
    /// `-e_⊥`.
    Left,
}

impl Axis {
    pub const ALL: [Axis; 4] = [Axis::Up, Axis::Down, Axis::Right, Axis::Left];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Up => "up",
            Axis::Down => "down",
            Axis::Right => "right",
            Axis::Left => "left",
        }
    }

    /// Unit vector `(e_⊥, e_N)` components.
    pub fn unit(self) -> (f64, f64) {
        match self {
            Axis::Up => (0.0, 1.0),
            Axis::Down => (0.0, -1.0),
            Axis::Right => (1.0, 0.0),
            Axis::Left => (-1.0, 0.0),
        }
    }
}

/// Directional extents `sup {<x, e> : u(x, t) > threshold}` of the wet set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportTrace {
    pub times: Vec<f64>,
    pub threshold: f64,
    pub dx: f64,
    pub dimension: usize,
    pub up: Vec<f64>,
    pub down: Vec<f64>,
    pub right: Vec<f64>,
    pub left: Vec<f64>,
    #[serde(skip)]
    pub masks: Vec<Vec<bool>>,
}

impl SupportTrace {
    pub fn extents(&self, axis: Axis) -> &[f64] {
        match axis {
            Axis::Up => &self.up,
            Axis::Down => &self.down,
            Axis::Right => &self.right,
            Axis::Left => &self.left,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of wet cells at each time.
    pub fn wet_counts(&self) -> Vec<usize> {
        self.masks.iter().map(|m| m.iter().filter(|&&w| w).count()).collect()
    }
}

/// Wet masks and extents of a field series. In one dimension the lateral
/// extents are zero.
pub fn extract_support(
    fields: &[SolutionField],
    grid: &Grid,
    model: &SoilModel,
    threshold: f64,
    exec: Execution,
) -> Result<SupportTrace, VerificationError> {
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(VerificationError::InvalidThreshold(threshold));
    }
    if let Some(f) = fields.iter().find(|f| f.v.len() != grid.len()) {
        return Err(VerificationError::GridMismatch { t: f.t });
    }
    let per_time = exec.map(fields.len(), |i| {
        let u = fields[i].u(model);
        let mask: Vec<bool> = u.iter().map(|&x| x > threshold).collect();
        let mut e = [f64::NEG_INFINITY; 4];
        for (k, _) in mask.iter().enumerate().filter(|(_, w)| **w) {
            let (xp, xn) = grid.coords(k);
            e[0] = e[0].max(xn);
            e[1] = e[1].max(-xn);
            e[2] = e[2].max(xp);
            e[3] = e[3].max(-xp);
        }
        (mask, e)
    });
    let mut trace = SupportTrace {
        times: Vec::with_capacity(fields.len()),
        threshold,
        dx: grid.dx(),
        dimension: grid.dimension,
        up: Vec::new(),
        down: Vec::new(),
        right: Vec::new(),
        left: Vec::new(),
        masks: Vec::new(),
    };
    for (field, (mask, e)) in fields.iter().zip(per_time) {
        if !e[0].is_finite() {
            return Err(VerificationError::EmptySupport { t: field.t });
        }
        trace.times.push(field.t);
        trace.up.push(e[0]);
        trace.down.push(e[1]);
        trace.right.push(e[2]);
        trace.left.push(e[3]);
        trace.masks.push(mask);
    }
    Ok(trace)
}

/// One trace per threshold.
pub fn threshold_sweep(
    fields: &[SolutionField],
    grid: &Grid,
    model: &SoilModel,
    thresholds: &[f64],
    exec: Execution,
) -> Result<Vec<SupportTrace>, VerificationError> {
    thresholds.iter().map(|&th| extract_support(fields, grid, model, th, exec)).collect()
}
