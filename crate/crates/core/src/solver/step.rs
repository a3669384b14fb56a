use super::coefficients::{CellEval, Coefficients};
use super::linear::{bicgstab, thomas, Stencil};
use super::{Grid, SolutionField, SolverConfig, SolverError};
use crate::constitutive::SoilModel;
use crate::exec::Execution;

/// Tolerance of the post-step maximum-principle assertion.
pub(crate) const MAX_PRINCIPLE_SLACK: f64 = 1e-8;

const MAX_DAMPING_HALVINGS: usize = 30;
const MAX_LINEAR_ITER: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepStats {
    pub newton_iterations: usize,
    /// Final `max |R|`.
    pub residual: f64,
    /// Mass that entered through the boundary during the step.
    pub boundary_exchange: f64,
}

pub(crate) struct Stepper<'a> {
    pub grid: Grid,
    pub model: &'a SoilModel,
    pub cfg: SolverConfig,
    pub coeffs: Coefficients<'a>,
    pub exec: Execution,
    n_perp: usize,
    n_vert: usize,
}

impl<'a> Stepper<'a> {
    pub fn new(grid: Grid, model: &'a SoilModel, cfg: SolverConfig, exec: Execution) -> Self {
        let n = grid.cells_per_axis;
        let n_perp = if grid.dimension == 1 { 1 } else { n };
        Self { grid, model, cfg, coeffs: Coefficients::new(model, cfg.epsilon, cfg.delta), exec, n_perp, n_vert: n }
    }

    pub fn mass_density(&self, v: &[f64]) -> Vec<f64> {
        self.exec.map(v.len(), |k| self.coeffs.mass_density(v[k]))
    }

    /// `Σ (ε v + ĝ_δ(v)) Δx^N`.
    pub fn mass(&self, v: &[f64]) -> f64 {
        let vol = self.grid.cell_volume();
        self.exec.sum(v.len(), |k| self.coeffs.mass_density(v[k])) * vol
    }

    fn evaluate(&self, v: &[f64], guess: &[f64]) -> Vec<CellEval> {
        self.exec.map(v.len(), |k| self.coeffs.eval(v[k], guess[k]))
    }

    /// Gravity flux entering the face above cell `k` and leaving through the
    /// face below it.
    fn gravity_faces(&self, ev: &[CellEval], k: usize) -> (f64, f64) {
        let j = k / self.n_perp;
        let dry = self.coeffs.dry_flux();
        let above = if j + 1 < self.n_vert { ev[k + self.n_perp].flux } else { dry };
        let here = ev[k].flux;
        if self.cfg.upwind {
            (above, here)
        } else {
            let below = if j > 0 { ev[k - self.n_perp].flux } else { dry };
            (0.5 * (above + here), 0.5 * (here + below))
        }
    }

    /// `R_k = m(v_k) - m_old_k - dt (Δ_h v + gravity divergence)_k`.
    fn residual(&self, v: &[f64], ev: &[CellEval], m_old: &[f64], dt: f64) -> Vec<f64> {
        let dx = self.grid.dx();
        let inv_dx2 = 1.0 / (dx * dx);
        let (np, nv) = (self.n_perp, self.n_vert);
        self.exec.map(v.len(), |k| {
            let (i, j) = (k % np, k / np);
            let vk = v[k];
            let mut lap = 0.0;
            if np > 1 {
                lap += if i > 0 { v[k - 1] } else { 0.0 } - vk;
                lap += if i + 1 < np { v[k + 1] } else { 0.0 } - vk;
            }
            lap += if j > 0 { v[k - np] } else { 0.0 } - vk;
            lap += if j + 1 < nv { v[k + np] } else { 0.0 } - vk;
            let (inflow, outflow) = self.gravity_faces(ev, k);
            ev[k].m - m_old[k] - dt * (lap * inv_dx2 + (inflow - outflow) / dx)
        })
    }

    fn jacobian(&self, ev: &[CellEval], dt: f64) -> Stencil {
        let dx = self.grid.dx();
        let d = dt / (dx * dx);
        let g = dt / dx;
        let (np, nv) = (self.n_perp, self.n_vert);
        let mut a = Stencil::new(np, nv);
        let lateral = if np > 1 { 2.0 } else { 0.0 };
        let upwind = self.cfg.upwind;
        self.exec.fill(&mut a.diag, |k| ev[k].dm + d * (2.0 + lateral) + if upwind { g * ev[k].dflux } else { 0.0 });
        if np > 1 {
            self.exec.fill(&mut a.west, |_| -d);
            self.exec.fill(&mut a.east, |_| -d);
        }
        self.exec.fill(&mut a.north, |k| {
            let j = k / np;
            if j + 1 < nv {
                let df = ev[k + np].dflux;
                -d - if upwind { g * df } else { 0.5 * g * df }
            } else {
                0.0
            }
        });
        self.exec.fill(&mut a.south, |k| {
            let j = k / np;
            if j > 0 {
                -d + if upwind { 0.0 } else { 0.5 * g * ev[k - np].dflux }
            } else {
                0.0
            }
        });
        a
    }

    fn solve(&self, a: &Stencil, rhs: &[f64]) -> Option<Vec<f64>> {
        let x = if self.n_perp == 1 {
            thomas(a, rhs).ok()?
        } else {
            bicgstab(a, rhs, self.cfg.linear_tol, MAX_LINEAR_ITER, self.exec).ok()?
        };
        x.iter().all(|x| x.is_finite()).then_some(x)
    }

    /// Mass entering through `∂Ω` during a step ending in state `v`.
    fn boundary_exchange(&self, v: &[f64], ev: &[CellEval], dt: f64) -> f64 {
        let dx = self.grid.dx();
        let (np, nv) = (self.n_perp, self.n_vert);
        let mut diffusive = 0.0;
        // Ghost values are zero at distance Δx beyond each boundary face.
        for j in [0, nv - 1] {
            for i in 0..np {
                diffusive -= v[j * np + i] / dx;
            }
        }
        if np > 1 {
            for j in 0..nv {
                diffusive -= v[j * np] / dx + v[j * np + np - 1] / dx;
            }
        }
        let dry = self.coeffs.dry_flux();
        let mut gravity = 0.0;
        for i in 0..np {
            let top = ev[(nv - 1) * np + i].flux;
            let bottom = ev[i].flux;
            if self.cfg.upwind {
                gravity += dry - bottom;
            } else {
                gravity += 0.5 * (dry + top) - 0.5 * (bottom + dry);
            }
        }
        dt * self.grid.face_area() * (diffusive + gravity)
    }

    /// One implicit Euler step of size `dt` by damped Newton.
    pub fn advance(&self, v_old: &[f64], t_new: f64, dt: f64, guess: &mut Vec<f64>) -> Result<(Vec<f64>, StepStats), SolverError> {
        let m_old = self.mass_density(v_old);
        let norm = |r: &[f64]| self.exec.max(r.len(), |k| r[k].abs());
        let mut v = v_old.to_vec();
        let mut ev = self.evaluate(&v, guess);
        let mut r = self.residual(&v, &ev, &m_old, dt);
        let mut res = norm(&r);
        let mut iters = 0;
        while res > self.cfg.newton_tol {
            if iters == self.cfg.newton_max_iter {
                return Err(SolverError::NewtonDiverged { t: t_new, residual: res });
            }
            iters += 1;
            let a = self.jacobian(&ev, dt);
            let rhs: Vec<f64> = r.iter().map(|x| -x).collect();
            let dv = self.solve(&a, &rhs).ok_or(SolverError::NewtonDiverged { t: t_new, residual: res })?;
            let cache: Vec<f64> = ev.iter().map(|e| e.u).collect();
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..=MAX_DAMPING_HALVINGS {
                let trial: Vec<f64> = v.iter().zip(&dv).map(|(a, b)| a + lambda * b).collect();
                let ev_t = self.evaluate(&trial, &cache);
                let r_t = self.residual(&trial, &ev_t, &m_old, dt);
                let res_t = norm(&r_t);
                if res_t.is_finite() && (res_t < (1.0 - 1e-4 * lambda) * res || res_t <= self.cfg.newton_tol) {
                    v = trial;
                    ev = ev_t;
                    r = r_t;
                    res = res_t;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                return Err(SolverError::NewtonDiverged { t: t_new, residual: res });
            }
        }
        let v_star = self.model.v_star();
        let (lo, hi) = (self.exec.max(v.len(), |k| -v[k]), self.exec.max(v.len(), |k| v[k]));
        if !(v.iter().all(|x| x.is_finite())) || -lo < -MAX_PRINCIPLE_SLACK || hi > v_star + MAX_PRINCIPLE_SLACK {
            return Err(SolverError::MaxPrincipleViolation { t: t_new, min: -lo, max: hi, v_star });
        }
        *guess = ev.iter().map(|e| e.u).collect();
        let boundary_exchange = self.boundary_exchange(&v, &ev, dt);
        Ok((v, StepStats { newton_iterations: iters, residual: res, boundary_exchange }))
    }
}

/// One implicit Euler step of size `cfg.dt`.
pub fn step(field: &SolutionField, model: &SoilModel, grid: &Grid, cfg: &SolverConfig) -> Result<(SolutionField, StepStats), SolverError> {
    if field.v.len() != grid.len() || !field.is_finite() {
        return Err(SolverError::InvalidGrid("field does not match the grid".into()));
    }
    cfg.validate(grid, model)?;
    let stepper = Stepper::new(*grid, model, *cfg, Execution::best());
    let mut guess = vec![f64::NAN; grid.len()];
    let t = field.t + cfg.dt;
    let (v, stats) = stepper.advance(&field.v, t, cfg.dt, &mut guess)?;
    Ok((SolutionField { t, v }, stats))
}
