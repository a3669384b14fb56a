use crate::constitutive::SoilModel;

/// Values below `TAYLOR_FRACTION * δ` use the linearisation about `v = 0`.
const TAYLOR_FRACTION: f64 = 1e-9;

/// Per-cell nonlinearities of the regularised problem at one value of `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct CellEval {
    /// `ε v + ĝ_δ(v)`.
    pub m: f64,
    pub dm: f64,
    /// `f̂(v⁺ + δ)`.
    pub flux: f64,
    pub dflux: f64,
    /// `f⁻¹(v + δ)`, reused as a warm start.
    pub u: f64,
}

/// `ĝ_δ(v) = ĝ(v + δ) - ĝ(δ)` and `f̂(v⁺ + δ)` with
/// `ĝ = g ∘ f⁻¹`, `f̂ = f' ∘ f⁻¹`.
#[derive(Debug, Clone)]
pub(crate) struct Coefficients<'a> {
    model: &'a SoilModel,
    epsilon: f64,
    delta: f64,
    at_zero: CellEval,
    /// `ĝ(δ)`.
    g_delta: f64,
}

impl<'a> Coefficients<'a> {
    pub fn new(model: &'a SoilModel, epsilon: f64, delta: f64) -> Self {
        let u = model.f_inv_extended(delta, None);
        let fp = model.f_prime(u);
        let g_delta = model.g(u);
        let at_zero = CellEval {
            m: 0.0,
            dm: epsilon + model.g_prime(u) / fp,
            flux: fp,
            dflux: model.f_second_or_fd(u) / fp,
            u,
        };
        Self { model, epsilon, delta, at_zero, g_delta }
    }

    /// `f̂(δ)`, the gravity flux through dry cells.
    pub fn dry_flux(&self) -> f64 {
        self.at_zero.flux
    }

    pub fn eval(&self, v: f64, guess: f64) -> CellEval {
        let z = &self.at_zero;
        if v.abs() <= TAYLOR_FRACTION * self.delta {
            return CellEval {
                m: z.dm * v,
                dm: z.dm,
                flux: z.flux + z.dflux * v.max(0.0),
                dflux: if v > 0.0 { z.dflux } else { 0.0 },
                u: z.u,
            };
        }
        let m = self.model;
        if v < 0.0 {
            // The flux only sees v⁺; ĝ_δ is frozen below -δ.
            let w = v + self.delta;
            if w <= 0.0 {
                return CellEval { m: self.epsilon * v - self.g_delta, dm: self.epsilon, flux: z.flux, dflux: 0.0, u: 0.0 };
            }
            let u = m.f_inv_extended(w, (guess > 0.0).then_some(guess));
            let fp = m.f_prime(u);
            return CellEval {
                m: self.epsilon * v + m.g(u) - self.g_delta,
                dm: self.epsilon + m.g_prime(u) / fp,
                flux: z.flux,
                dflux: 0.0,
                u,
            };
        }
        let u = m.f_inv_extended(v + self.delta, (guess > 0.0).then_some(guess));
        let fp = m.f_prime(u);
        CellEval {
            m: self.epsilon * v + m.g(u) - self.g_delta,
            dm: self.epsilon + m.g_prime(u) / fp,
            flux: fp,
            dflux: m.f_second_or_fd(u) / fp,
            u,
        }
    }

    /// `ε v + ĝ_δ(v)` alone.
    pub fn mass_density(&self, v: f64) -> f64 {
        self.eval(v, f64::NAN).m
    }
}
