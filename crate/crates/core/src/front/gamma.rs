//! The integrals `Γ₀`, `Γ̂₀` and a cached tabulation of their inverses.
//!
//! Both half-spaces share one kernel. Writing `z = z_c + y` with `y > 0`,
//!
//! * lower: `z_c = P♯`, `D(v) = P♯ - P(v)`,
//! * upper: `z_c = -P♭`, `D(v) = P(v) - P♭`,
//!
//! so that `Γ(z) = ∫ P / (y + D)²` with `D ≥ 0` in both cases.

use crate::constitutive::SoilModel;
use crate::exec::Execution;
use crate::numeric::quadrature::{integrate_scale_free, integrate_singular, kronrod, Integral, Rule, Tolerance};
use crate::numeric::{brent, RootError};
use serde::{Deserialize, Serialize};

pub(crate) const TOL: Tolerance = Tolerance::new(1e-13, 1e-300);

/// Which family of directions a quantity belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfSpace {
    /// `cos ω ≥ 0`: gravity-aligned directions.
    Lower,
    /// `cos ω < 0`.
    Upper,
}

#[derive(Clone, Copy)]
pub(crate) struct Kernel<'a> {
    pub model: &'a SoilModel,
    pub half: HalfSpace,
    /// `z_c`.
    pub z_crit: f64,
    /// Location where `D` vanishes.
    pub v_crit: f64,
    /// `P♯ + sqrt(Q*)`, a natural speed scale.
    pub scale: f64,
}

impl<'a> Kernel<'a> {
    pub fn new(model: &'a SoilModel, half: HalfSpace) -> Self {
        let (z_crit, v_crit) = match half {
            HalfSpace::Lower => (model.p_sharp(), model.v_sharp()),
            HalfSpace::Upper => (-model.p_flat(), model.v_flat()),
        };
        Self { model, half, z_crit, v_crit, scale: model.p_sharp() + model.q_star().sqrt() }
    }

    #[inline]
    pub fn d(&self, v: f64) -> f64 {
        let p = self.model.p(v);
        match self.half {
            HalfSpace::Lower => (self.model.p_sharp() - p).max(0.0),
            HalfSpace::Upper => (p - self.model.p_flat()).max(0.0),
        }
    }

    /// `∫_0^{u*} P / (y + D)^k dv`.
    pub fn moment(&self, y: f64, k: i32) -> Integral {
        let f = |v: f64| {
            let p = self.model.p(v);
            p / (y + self.d(v)).powi(k)
        };
        let u = self.model.u_star();
        // D carries an absolute rounding error of about eps * scale (from
        // z_c - P or from rounding v near v_crit), which caps the attainable
        // relative accuracy once y is that small.
        let tol = if y > 0.0 && (self.z_crit != 0.0 || self.v_crit > 0.0) {
            Tolerance::new(TOL.rel.max(1e-15 * self.scale / y), TOL.abs)
        } else {
            TOL
        };
        if y > 1e-2 * self.scale {
            let (val, _) = kronrod(&f, 0.0, u, tol);
            if val.is_finite() {
                Integral::Finite(val)
            } else {
                Integral::Divergent
            }
        } else if y == 0.0 {
            integrate_scale_free(Rule::Kronrod, &f, 0.0, u, &[self.v_crit], tol)
        } else {
            integrate_singular(Rule::Kronrod, &f, 0.0, u, &[self.v_crit], tol)
        }
    }

    /// `Γ` at offset `y`.
    pub fn gamma(&self, y: f64) -> f64 {
        self.moment(y, 2).value_or_inf()
    }

    /// `dΓ/dz` at offset `y` (`-inf` when divergent).
    pub fn gamma_prime(&self, y: f64) -> f64 {
        -2.0 * self.moment(y, 3).value_or_inf()
    }

    /// `∫ P / (z ∓ P) = ∫_z^∞ Γ`.
    pub fn flux(&self, y: f64) -> f64 {
        self.moment(y, 1).value_or_inf()
    }

    /// `Γ` at the critical point, `+inf` when divergent.
    pub fn critical_value(&self) -> f64 {
        self.moment(0.0, 2).value_or_inf()
    }

    /// Spread of `z` around `z_c` permitted by the sandwich bounds.
    fn sandwich_width(&self) -> f64 {
        match self.half {
            HalfSpace::Lower => self.model.p_sharp(),
            HalfSpace::Upper => self.model.p_sharp() - self.model.p_flat(),
        }
    }

    /// Offset `y` with `Γ(z_c + y) = s`; `None` when `s` exceeds `Γ(z_c)`.
    pub fn invert(&self, s: f64, k_crit: f64) -> Result<Option<f64>, RootError> {
        if s > k_crit {
            return Ok(None);
        }
        if s == k_crit {
            return Ok(Some(0.0));
        }
        let q = (self.model.q_star() / s).sqrt();
        let hi = q;
        let mut lo = (q - self.sandwich_width()).max(0.0);
        let f = |y: f64| self.gamma(y) - s;
        if lo == 0.0 {
            lo = hi;
            loop {
                lo *= 1e-3;
                let g = self.gamma(lo);
                if g >= s || lo < 1e-300 {
                    break;
                }
            }
        }
        // Sandwich endpoints are attained exactly for constant `P`.
        if lo == hi || f(hi) >= 0.0 {
            return Ok(Some(hi));
        }
        if f(lo) <= 0.0 {
            return Ok(Some(lo));
        }
        let y = brent(f, lo, hi, 1e-3 * lo * f64::EPSILON)?;
        Ok(Some(y))
    }
}

/// Cubic Hermite tabulation of `w(σ) = σ Z(σ²)`, where `Z = Γ⁻¹`, together
/// with its running integral. Built once per half-space and shared by all
/// directions through the scaling identity.
#[derive(Debug, Clone)]
pub(crate) struct GammaTable {
    /// `Γ(z_c)`, possibly infinite.
    pub k_crit: f64,
    sigma: Vec<f64>,
    w: Vec<f64>,
    dw: Vec<f64>,
    /// `∫_0^{σ_i} w`.
    cum: Vec<f64>,
}

/// Nodes per octave of the offset `y`.
const NODES_PER_OCTAVE: f64 = 24.0;

impl GammaTable {
    pub fn build(kernel: &Kernel<'_>, exec: Execution) -> Self {
        let m = kernel.model;
        let q_star = m.q_star();
        let k_crit = kernel.critical_value();
        let y_hi = 1e6 * kernel.scale;
        let y_lo = 1e-13 * kernel.scale;
        let n = ((y_hi / y_lo).log2() * NODES_PER_OCTAVE).ceil() as usize;
        let ratio = (y_lo / y_hi).powf(1.0 / n as f64);
        let ys: Vec<f64> = (0..=n).map(|k| y_hi * ratio.powi(k as i32)).collect();
        // Chunked so that nodes past a finite Γ(z_c) are never evaluated.
        const CHUNK: usize = 64;
        let mut nodes: Vec<(f64, f64)> = Vec::with_capacity(ys.len());
        for start in (0..ys.len()).step_by(CHUNK) {
            let end = (start + CHUNK).min(ys.len());
            let part = exec.map(end - start, |i| {
                let y = ys[start + i];
                (kernel.gamma(y), kernel.gamma_prime(y))
            });
            let saturated = k_crit.is_finite() && part.last().is_some_and(|n| n.0 >= k_crit * (1.0 - 1e-10));
            nodes.extend(part);
            if saturated {
                break;
            }
        }

        // w(0) = sqrt(Q*), slope ±Q₂/Q* from the large-z expansion of Γ.
        let q2 = crate::numeric::quadrature::kronrod(&|v: f64| m.p(v) * m.p(v), 0.0, m.u_star(), TOL).0;
        let slope0 = match kernel.half {
            HalfSpace::Lower => q2 / q_star,
            HalfSpace::Upper => -q2 / q_star,
        };
        let mut sigma = vec![0.0];
        let mut w = vec![q_star.sqrt()];
        let mut dw = vec![slope0];
        let mut last_s = 0.0;
        for (i, &(s, gp)) in nodes.iter().enumerate() {
            if !(s.is_finite() && s > last_s * (1.0 + 1e-12)) {
                continue;
            }
            if k_crit.is_finite() && s >= k_crit * (1.0 - 1e-10) {
                break;
            }
            let z = kernel.z_crit + ys[i];
            let sg = s.sqrt();
            sigma.push(sg);
            w.push(sg * z);
            dw.push(z + if gp.is_finite() && gp != 0.0 { 2.0 * s / gp } else { 0.0 });
            last_s = s;
        }
        if k_crit.is_finite() {
            let gp0 = kernel.gamma_prime(0.0);
            let sg = k_crit.sqrt();
            sigma.push(sg);
            w.push(sg * kernel.z_crit);
            dw.push(kernel.z_crit + if gp0.is_finite() && gp0 != 0.0 { 2.0 * k_crit / gp0 } else { 0.0 });
        }
        let mut cum = Vec::with_capacity(sigma.len());
        cum.push(0.0);
        for i in 1..sigma.len() {
            let h = sigma[i] - sigma[i - 1];
            let panel = h * (w[i - 1] + w[i]) / 2.0 + h * h * (dw[i - 1] - dw[i]) / 12.0;
            cum.push(cum[i - 1] + panel);
        }
        Self { k_crit, sigma, w, dw, cum }
    }

    pub fn sigma_max(&self) -> f64 {
        *self.sigma.last().expect("non-empty")
    }

    fn locate(&self, sg: f64) -> usize {
        let k = self.sigma.partition_point(|&x| x <= sg);
        k.clamp(1, self.sigma.len() - 1) - 1
    }

    /// `(Z(σ²), ∫_0^{σ²} Z ds)` for `σ` within the table.
    pub fn eval(&self, sg: f64) -> (f64, f64) {
        let i = self.locate(sg);
        let h = self.sigma[i + 1] - self.sigma[i];
        let t = ((sg - self.sigma[i]) / h).clamp(0.0, 1.0);
        let (w0, w1) = (self.w[i], self.w[i + 1]);
        let (d0, d1) = (self.dw[i] * h, self.dw[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let t4 = t3 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * w0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * w1
            + (t3 - t2) * d1;
        let partial = h
            * ((t4 / 2.0 - t3 + t) * w0
                + (t4 / 4.0 - 2.0 * t3 / 3.0 + t2 / 2.0) * d0
                + (-t4 / 2.0 + t3) * w1
                + (t4 / 4.0 - t3 / 3.0) * d1);
        let z = if sg > 0.0 { value / sg } else { f64::INFINITY };
        (z, 2.0 * (self.cum[i] + partial))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::PresetP;

    #[test]
    fn constant_p_table_is_exact() {
        let m = SoilModel::from_preset(PresetP::Const, 1.0).unwrap();
        for half in [HalfSpace::Lower, HalfSpace::Upper] {
            let k = Kernel::new(&m, half);
            let t = GammaTable::build(&k, Execution::Sequential);
            assert!(t.k_crit.is_infinite());
            for s in [1e-6f64, 0.01, 0.25, 1.0, 4.0, 16.0] {
                let (z, int) = t.eval(s.sqrt());
                let (ze, ie) = match half {
                    HalfSpace::Lower => (1.0 + 1.0 / s.sqrt(), s + 2.0 * s.sqrt()),
                    HalfSpace::Upper => (1.0 / s.sqrt() - 1.0, 2.0 * s.sqrt() - s),
                };
                assert!((z - ze).abs() <= 1e-11 * ze.abs().max(1.0), "{half:?} s={s}: {z} vs {ze}");
                assert!((int - ie).abs() <= 1e-11 * ie.abs().max(1.0), "{half:?} s={s}: {int} vs {ie}");
            }
        }
    }

    #[test]
    fn finite_critical_value_terminates_table() {
        let m = SoilModel::from_preset(PresetP::Sqrt, 1.0).unwrap();
        let k = Kernel::new(&m, HalfSpace::Upper);
        let t = GammaTable::build(&k, Execution::Sequential);
        assert!((t.k_crit - 2.0).abs() < 1e-9);
        assert!((t.sigma_max() - 2f64.sqrt()).abs() < 1e-9);
        let (z, int) = t.eval(t.sigma_max());
        assert!(z.abs() < 1e-12);
        // ∫_0^K Γ̂⁻¹ = ∫_0^∞ Γ̂ = u*.
        assert!((int - 1.0).abs() < 1e-7, "{int}");
    }
}
