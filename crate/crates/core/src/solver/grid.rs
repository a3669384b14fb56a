use super::SolverError;
use crate::constitutive::SoilModel;
use serde::{Deserialize, Serialize};

/// Uniform cell-centred grid on `(-M, M)^dim`. In 2D the cell index is
/// `j * n + i` with `i` along `e_⊥` and `j` along `e_N`; a 1D grid is a
/// vertical column along `e_N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dimension: usize,
    pub half_width: f64,
    pub cells_per_axis: usize,
}

impl Grid {
    pub fn new(dimension: usize, half_width: f64, cells_per_axis: usize) -> Result<Self, SolverError> {
        if !(dimension == 1 || dimension == 2) {
            return Err(SolverError::InvalidGrid(format!("dimension must be 1 or 2, got {dimension}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(SolverError::InvalidGrid(format!("half-width must be positive, got {half_width}")));
        }
        if cells_per_axis < 4 {
            return Err(SolverError::InvalidGrid(format!("need at least 4 cells per axis, got {cells_per_axis}")));
        }
        Ok(Self { dimension, half_width, cells_per_axis })
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.cells_per_axis as f64
    }

    pub fn len(&self) -> usize {
        self.cells_per_axis.pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dimension as i32)
    }

    pub fn face_area(&self) -> f64 {
        self.dx().powi(self.dimension as i32 - 1)
    }

    /// Centre of cell `k` along one axis.
    pub fn center(&self, k: usize) -> f64 {
        -self.half_width + (k as f64 + 0.5) * self.dx()
    }

    /// `(i, j)` with `j` along `e_N`.
    pub fn split(&self, idx: usize) -> (usize, usize) {
        match self.dimension {
            1 => (0, idx),
            _ => (idx % self.cells_per_axis, idx / self.cells_per_axis),
        }
    }

    /// `(x_⊥, x_N)` of a cell centre.
    pub fn coords(&self, idx: usize) -> (f64, f64) {
        let (i, j) = self.split(idx);
        match self.dimension {
            1 => (0.0, self.center(j)),
            _ => (self.center(i), self.center(j)),
        }
    }

    /// Smallest admissible half-width `R₀ + u* + T P♯ + 2 sqrt(Q* T)`.
    pub fn required_half_width(model: &SoilModel, r0: f64, horizon: f64) -> f64 {
        r0 + model.u_star() + horizon * model.p_sharp() + 2.0 * (model.q_star() * horizon).sqrt()
    }

    pub fn check_horizon(&self, model: &SoilModel, r0: f64, horizon: f64) -> Result<(), SolverError> {
        let need = Self::required_half_width(model, r0, horizon);
        if self.half_width > need {
            Ok(())
        } else {
            Err(SolverError::DomainTooSmall { half_width: self.half_width, required: need })
        }
    }
}

/// The Kirchhoff variable `v` on every cell at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionField {
    pub t: f64,
    pub v: Vec<f64>,
}

impl SolutionField {
    pub fn zeros(grid: &Grid) -> Self {
        Self { t: 0.0, v: vec![0.0; grid.len()] }
    }

    /// `u = f⁻¹(v)` per cell.
    pub fn u(&self, model: &SoilModel) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.v.len());
        let mut guess = None;
        for &v in &self.v {
            let u = model.f_inv_extended(v, guess);
            guess = (u > 0.0).then_some(u);
            out.push(u);
        }
        out
    }

    pub fn min(&self) -> f64 {
        self.v.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.v.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialProfile {
    /// `u* max(0, 1 - |x|²/R₀²)`.
    Cap,
    /// `u* 1_{|x| ≤ R₀}`.
    Indicator,
}

/// Initial moisture bump of radius `r0` centred at the origin, stored as
/// `v₀ = f(u₀)`.
pub fn initial_bump(grid: &Grid, model: &SoilModel, r0: f64, profile: InitialProfile) -> Result<SolutionField, SolverError> {
    if !(r0 > 0.0) || r0 >= grid.half_width {
        return Err(SolverError::R0TooLarge { r0, half_width: grid.half_width });
    }
    let u_star = model.u_star();
    let v = (0..grid.len())
        .map(|idx| {
            let (a, b) = grid.coords(idx);
            let rho2 = (a * a + b * b) / (r0 * r0);
            let u = match profile {
                InitialProfile::Cap => u_star * (1.0 - rho2).max(0.0),
                InitialProfile::Indicator => {
                    if rho2 <= 1.0 {
                        u_star
                    } else {
                        0.0
                    }
                }
            };
            model.f(u)
        })
        .collect();
    Ok(SolutionField { t: 0.0, v })
}
