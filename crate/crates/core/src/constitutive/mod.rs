//! Admissible soil laws `(f, g)` in the nondimensional pressure variable.
//!
//! A [`SoilModel`] carries the Kirchhoff potential `f`, the water-content
//! law `g`, their derivatives, and the derived pressure ratio
//! `P(u) = f'(u) / g(u)` together with its bounds `P♭ ≤ P ≤ P♯`, the limit
//! `P(0)` and `Q* = ∫_0^{u*} P`. Models are immutable once built.

mod hypothesis;
mod presets;

pub use hypothesis::{check_hypothesis, AdmissibilityReport};
pub use presets::PresetP;

use crate::numeric::quadrature::{gauss_legendre5, integrate_singular, Rule, Tolerance};
use crate::numeric::{newton_bracketed, Pchip};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Shared scalar map.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Number of probe points used for scans over `(0, u*]`.
pub const SCAN_POINTS: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstitutiveError {
    #[error("inadmissible soil law: {0}")]
    Admissibility(String),
    #[error("P({v}) = {p} is not positive")]
    NonPositiveP { v: f64, p: f64 },
    #[error("{what} = {value} outside [{lo}, {hi}]")]
    OutOfRange { what: &'static str, value: f64, lo: f64, hi: f64 },
    #[error("second derivative of f is not evaluable for this model")]
    NotEvaluable,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid table: {0}")]
    InvalidTable(String),
}

/// Power-law behaviour `f = C_f u^(p+1)`, `g = C_g u^(q+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub c_f: f64,
    pub p: f64,
    pub c_g: f64,
    pub q: f64,
}

impl PowerLaw {
    /// Closed-form admissibility: `p > 0` and `-1 < q < 2p - 1`.
    pub fn is_admissible(&self) -> bool {
        self.p > 0.0 && self.q > -1.0 && self.q < 2.0 * self.p - 1.0
    }

    /// `P(u) = coefficient * u^exponent`.
    pub fn p_coefficient(&self) -> f64 {
        self.c_f * (self.p + 1.0) / self.c_g
    }

    pub fn p_exponent(&self) -> f64 {
        self.p - self.q - 1.0
    }
}

/// An analytic `P`, either one of the reference presets or user supplied.
#[derive(Clone)]
pub enum PLaw {
    Preset(PresetP),
    Custom { p: ScalarFn, dp: Option<ScalarFn> },
}

impl PLaw {
    fn p(&self, v: f64) -> f64 {
        match self {
            PLaw::Preset(pr) => pr.p(v),
            PLaw::Custom { p, .. } => p(v),
        }
    }

    fn dp(&self, v: f64) -> Option<f64> {
        match self {
            PLaw::Preset(pr) => Some(pr.dp(v)),
            PLaw::Custom { dp, .. } => dp.as_ref().map(|d| d(v)),
        }
    }
}

/// Conductivity-based construction `f(u) = ∫_0^u κ(g(s)) ds`.
#[derive(Clone)]
pub struct ConductivityLaw {
    pub kappa: ScalarFn,
    pub dkappa: Option<ScalarFn>,
    pub g: ScalarFn,
    pub dg: ScalarFn,
}

#[derive(Clone)]
pub enum SoilKind {
    PowerLaw(PowerLaw),
    /// `P` given directly; `g(u) = u`.
    PStar(PLaw),
    /// `P` tabulated and interpolated by a monotone cubic; `g(u) = u`.
    Tabulated(Pchip),
    Conductivity(ConductivityLaw),
}

impl fmt::Debug for SoilKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SoilKind::PowerLaw(pl) => f.debug_tuple("PowerLaw").field(pl).finish(),
            SoilKind::PStar(PLaw::Preset(p)) => f.debug_tuple("PStar").field(p).finish(),
            SoilKind::PStar(PLaw::Custom { .. }) => f.write_str("PStar(custom)"),
            SoilKind::Tabulated(t) => write!(f, "Tabulated({} nodes)", t.breakpoints().len()),
            SoilKind::Conductivity(_) => f.write_str("Conductivity"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Admissibility {
    Admissible,
    Inadmissible { reason: String },
}

/// Cumulative table of `f` on a uniform grid; values between nodes are
/// completed with one Gauss-Legendre panel of `f'`.
#[derive(Debug, Clone)]
struct Primitive {
    h: f64,
    cum: Vec<f64>,
}

impl Primitive {
    fn build(fp: &dyn Fn(f64) -> f64, u_max: f64, panels: usize) -> Self {
        let h = u_max / panels as f64;
        let mut cum = Vec::with_capacity(panels + 1);
        cum.push(0.0);
        let mut acc = 0.0;
        for i in 0..panels {
            acc += gauss_legendre5(fp, i as f64 * h, (i + 1) as f64 * h);
            cum.push(acc);
        }
        Self { h, cum }
    }

    fn eval(&self, fp: &dyn Fn(f64) -> f64, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let last = self.cum.len() - 1;
        let i = ((u / self.h) as usize).min(last);
        let x0 = i as f64 * self.h;
        self.cum[i] + gauss_legendre5(fp, x0, u)
    }
}

/// An admissible soil law with precomputed `P` statistics.
#[derive(Clone)]
pub struct SoilModel {
    kind: SoilKind,
    u_star: f64,
    p_flat: f64,
    p_sharp: f64,
    p_zero: f64,
    q_star: f64,
    v_flat: f64,
    v_sharp: f64,
    admissibility: Admissibility,
    primitive: Option<Arc<Primitive>>,
}

impl fmt::Debug for SoilModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SoilModel")
            .field("kind", &self.kind)
            .field("u_star", &self.u_star)
            .field("p_flat", &self.p_flat)
            .field("p_sharp", &self.p_sharp)
            .field("p_zero", &self.p_zero)
            .field("q_star", &self.q_star)
            .field("admissibility", &self.admissibility)
            .finish()
    }
}

fn check_positive(name: &str, x: f64) -> Result<(), ConstitutiveError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(ConstitutiveError::InvalidParameter(format!("{name} must be positive and finite, got {x}")))
    }
}

const QUAD_TOL: Tolerance = Tolerance::new(1e-10, 1e-300);

impl SoilModel {
    /// Power-law soil; rejects exponents outside `p > 0, -1 < q < 2p - 1`.
    pub fn from_power_law(c_f: f64, p: f64, c_g: f64, q: f64, u_star: f64) -> Result<Self, ConstitutiveError> {
        let law = PowerLaw { c_f, p, c_g, q };
        if !law.is_admissible() {
            return Err(ConstitutiveError::Admissibility(format!(
                "power law requires p > 0 and -1 < q < 2p - 1, got p = {p}, q = {q}"
            )));
        }
        Self::power_law_unchecked(law, u_star)
    }

    /// Builds a power-law model without enforcing admissibility; the
    /// verdict is recorded in [`SoilModel::admissibility`]. Intended for
    /// diagnostics such as [`check_hypothesis`].
    pub fn power_law_unchecked(law: PowerLaw, u_star: f64) -> Result<Self, ConstitutiveError> {
        check_positive("C_f", law.c_f)?;
        check_positive("C_g", law.c_g)?;
        check_positive("u_star", u_star)?;
        if !law.p.is_finite() || !law.q.is_finite() {
            return Err(ConstitutiveError::InvalidParameter("exponents must be finite".into()));
        }
        let coef = law.p_coefficient();
        let e = law.p_exponent();
        let at_top = coef * u_star.powf(e);
        let (p_flat, v_flat, p_sharp, v_sharp, p_zero) = if e > 0.0 {
            (0.0, 0.0, at_top, u_star, 0.0)
        } else if e < 0.0 {
            (at_top, u_star, f64::INFINITY, 0.0, f64::INFINITY)
        } else {
            (coef, 0.0, coef, 0.0, coef)
        };
        let q_star = if e > -1.0 { coef * u_star.powf(e + 1.0) / (e + 1.0) } else { f64::INFINITY };
        let admissibility = if law.is_admissible() {
            Admissibility::Admissible
        } else {
            Admissibility::Inadmissible {
                reason: format!("p = {} and q = {} violate p > 0, -1 < q < 2p - 1", law.p, law.q),
            }
        };
        Ok(Self {
            kind: SoilKind::PowerLaw(law),
            u_star,
            p_flat,
            p_sharp,
            p_zero,
            q_star,
            v_flat,
            v_sharp,
            admissibility,
            primitive: None,
        })
    }

    /// One of the reference `P` functions with `g(u) = u`.
    pub fn from_preset(preset: PresetP, u_star: f64) -> Result<Self, ConstitutiveError> {
        Self::from_p_law(PLaw::Preset(preset), u_star)
    }

    /// A model determined by `P` alone, with the convention `g(u) = u` and
    /// `f(u) = ∫_0^u P(s) s ds`, so that `f'/g = P` exactly. The derivative
    /// `dp` is optional; without it `f''` is not evaluable.
    pub fn from_p_star<F>(p: F, dp: Option<ScalarFn>, u_star: f64) -> Result<Self, ConstitutiveError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_p_law(PLaw::Custom { p: Arc::new(p), dp }, u_star)
    }

    fn from_p_law(law: PLaw, u_star: f64) -> Result<Self, ConstitutiveError> {
        check_positive("u_star", u_star)?;
        let pf = |v: f64| law.p(v);
        probe_positive(&pf, u_star)?;
        let primitive = match &law {
            PLaw::Preset(_) => None,
            PLaw::Custom { p, .. } => {
                let p = p.clone();
                let fp = move |s: f64| p(s) * s;
                Some(Arc::new(Primitive::build(&fp, 2.0 * u_star, SCAN_POINTS)))
            }
        };
        Ok(Self::with_stats(SoilKind::PStar(law), u_star, primitive))
    }

    /// `P` from `(v, P(v))` samples with `v` strictly increasing from 0 and
    /// covering `[0, u*]`.
    pub fn from_table(table: &[[f64; 2]], u_star: f64) -> Result<Self, ConstitutiveError> {
        check_positive("u_star", u_star)?;
        if table.len() < 2 {
            return Err(ConstitutiveError::InvalidTable("need at least two rows".into()));
        }
        if table[0][0] != 0.0 {
            return Err(ConstitutiveError::InvalidTable("first abscissa must be 0".into()));
        }
        if table.last().expect("len >= 2")[0] < u_star {
            return Err(ConstitutiveError::InvalidTable(format!("table must reach u_star = {u_star}")));
        }
        let x: Vec<f64> = table.iter().map(|r| r[0]).collect();
        let y: Vec<f64> = table.iter().map(|r| r[1]).collect();
        if y.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(ConstitutiveError::InvalidTable("P values must be finite and non-negative".into()));
        }
        let pchip = Pchip::new(x, y)
            .ok_or_else(|| ConstitutiveError::InvalidTable("abscissae must be strictly increasing".into()))?;
        let pf = |v: f64| pchip.value(v);
        probe_positive(&pf, u_star)?;
        let fp = |s: f64| pchip.value(s).max(0.0) * s;
        let primitive = Some(Arc::new(Primitive::build(&fp, 2.0 * u_star, SCAN_POINTS)));
        Ok(Self::with_stats(SoilKind::Tabulated(pchip), u_star, primitive))
    }

    /// Builds `f(u) = ∫_0^u κ(g(s)) ds` from a conductivity `κ(θ)` and a
    /// water-content law `g`.
    pub fn from_conductivity(law: ConductivityLaw, u_star: f64) -> Result<Self, ConstitutiveError> {
        check_positive("u_star", u_star)?;
        for k in 1..=SCAN_POINTS {
            let u = u_star * k as f64 / SCAN_POINTS as f64;
            let (fp, gp) = ((law.kappa)((law.g)(u)), (law.dg)(u));
            if !(fp > 0.0 && gp > 0.0) {
                return Err(ConstitutiveError::Admissibility(format!(
                    "f'({u}) = {fp} and g'({u}) = {gp} must both be positive"
                )));
            }
        }
        let (kappa, g) = (law.kappa.clone(), law.g.clone());
        let fp = move |s: f64| kappa(g(s));
        let primitive = Some(Arc::new(Primitive::build(&fp, 2.0 * u_star, SCAN_POINTS)));
        Ok(Self::with_stats(SoilKind::Conductivity(law), u_star, primitive))
    }

    fn with_stats(kind: SoilKind, u_star: f64, primitive: Option<Arc<Primitive>>) -> Self {
        let mut model = Self {
            kind,
            u_star,
            p_flat: 0.0,
            p_sharp: 0.0,
            p_zero: 0.0,
            q_star: 0.0,
            v_flat: 0.0,
            v_sharp: 0.0,
            admissibility: Admissibility::Admissible,
            primitive,
        };
        let pf = |v: f64| model.p(v);
        let p_zero = richardson_limit_at_zero(&pf, u_star);
        let (p_flat, v_flat, p_sharp, v_sharp) = scan_bounds(&pf, u_star, p_zero);
        let q_star = integrate_singular(Rule::Simpson, &pf, 0.0, u_star, &[0.0], QUAD_TOL).value_or_inf();
        model.p_zero = p_zero.clamp(p_flat, p_sharp);
        model.p_flat = p_flat;
        model.p_sharp = p_sharp;
        model.v_flat = v_flat;
        model.v_sharp = v_sharp;
        model.q_star = q_star;
        model
    }

    pub fn kind(&self) -> &SoilKind {
        &self.kind
    }

    pub fn u_star(&self) -> f64 {
        self.u_star
    }

    /// `inf P` over `(0, u*]`.
    pub fn p_flat(&self) -> f64 {
        self.p_flat
    }

    /// `sup P` over `(0, u*]`.
    pub fn p_sharp(&self) -> f64 {
        self.p_sharp
    }

    /// `lim_{u -> 0+} P(u)`.
    pub fn p_zero(&self) -> f64 {
        self.p_zero
    }

    /// `Q* = ∫_0^{u*} P(v) dv`.
    pub fn q_star(&self) -> f64 {
        self.q_star
    }

    /// Location where `P` attains (or approaches) `P♭`.
    pub fn v_flat(&self) -> f64 {
        self.v_flat
    }

    /// Location where `P` attains (or approaches) `P♯`.
    pub fn v_sharp(&self) -> f64 {
        self.v_sharp
    }

    pub fn admissibility(&self) -> &Admissibility {
        &self.admissibility
    }

    /// `v* = f(u*)`.
    pub fn v_star(&self) -> f64 {
        self.f(self.u_star)
    }

    pub fn f(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            SoilKind::PowerLaw(pl) => pl.c_f * u.powf(pl.p + 1.0),
            SoilKind::PStar(PLaw::Preset(pr)) => pr.kirchhoff(u),
            _ => {
                let prim = self.primitive.as_ref().expect("tabulated primitive");
                prim.eval(&|s| self.f_prime(s), u)
            }
        }
    }

    pub fn f_prime(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            SoilKind::PowerLaw(pl) => pl.c_f * (pl.p + 1.0) * u.powf(pl.p),
            SoilKind::PStar(law) => law.p(u) * u,
            SoilKind::Tabulated(t) => t.value(u).max(0.0) * u,
            SoilKind::Conductivity(c) => (c.kappa)((c.g)(u)),
        }
    }

    /// `f''(u)` where an analytic form is available.
    pub fn f_second(&self, u: f64) -> Option<f64> {
        match &self.kind {
            SoilKind::PowerLaw(pl) => Some(pl.c_f * (pl.p + 1.0) * pl.p * u.powf(pl.p - 1.0)),
            SoilKind::PStar(law) => law.dp(u).map(|d| d * u + law.p(u)),
            SoilKind::Tabulated(t) => Some(t.derivative(u) * u + t.value(u)),
            SoilKind::Conductivity(c) => c.dkappa.as_ref().map(|dk| dk((c.g)(u)) * (c.dg)(u)),
        }
    }

    /// `f''(u)`, falling back to a central difference of `f'`.
    pub fn f_second_or_fd(&self, u: f64) -> f64 {
        self.f_second(u).unwrap_or_else(|| {
            let h = 1e-6 * (u.abs() + self.u_star * 1e-3);
            let lo = (u - h).max(0.0);
            (self.f_prime(u + h) - self.f_prime(lo)) / (u + h - lo)
        })
    }

    pub fn g(&self, u: f64) -> f64 {
        match &self.kind {
            SoilKind::PowerLaw(pl) => {
                if u <= 0.0 {
                    0.0
                } else {
                    pl.c_g * u.powf(pl.q + 1.0)
                }
            }
            SoilKind::PStar(_) | SoilKind::Tabulated(_) => u,
            SoilKind::Conductivity(c) => (c.g)(u),
        }
    }

    pub fn g_prime(&self, u: f64) -> f64 {
        match &self.kind {
            SoilKind::PowerLaw(pl) => pl.c_g * (pl.q + 1.0) * u.powf(pl.q),
            SoilKind::PStar(_) | SoilKind::Tabulated(_) => 1.0,
            SoilKind::Conductivity(c) => (c.dg)(u),
        }
    }

    /// `P(u) = f'(u) / g(u)` for `u > 0`; at `u = 0` returns the limit.
    pub fn p(&self, u: f64) -> f64 {
        match &self.kind {
            SoilKind::PowerLaw(pl) => {
                if u <= 0.0 {
                    self.p_zero
                } else {
                    pl.p_coefficient() * u.powf(pl.p_exponent())
                }
            }
            SoilKind::PStar(law) => law.p(u),
            SoilKind::Tabulated(t) => t.value(u).max(0.0),
            SoilKind::Conductivity(c) => {
                if u <= 0.0 {
                    self.p_zero
                } else {
                    (c.kappa)((c.g)(u)) / (c.g)(u)
                }
            }
        }
    }

    /// `P'(u)` where available.
    pub fn p_prime(&self, u: f64) -> Option<f64> {
        match &self.kind {
            SoilKind::PowerLaw(pl) => Some(pl.p_coefficient() * pl.p_exponent() * u.powf(pl.p_exponent() - 1.0)),
            SoilKind::PStar(law) => law.dp(u),
            SoilKind::Tabulated(t) => Some(t.derivative(u)),
            SoilKind::Conductivity(_) => {
                let (fp, g, gp) = (self.f_prime(u), self.g(u), self.g_prime(u));
                self.f_second(u).map(|fs| (fs * g - fp * gp) / (g * g))
            }
        }
    }

    /// Kirchhoff transform `v = f(u)` on `[0, u*]`.
    pub fn kirchhoff(&self, u: f64) -> Result<f64, ConstitutiveError> {
        if !(0.0..=self.u_star).contains(&u) {
            return Err(ConstitutiveError::OutOfRange { what: "u", value: u, lo: 0.0, hi: self.u_star });
        }
        Ok(self.f(u))
    }

    /// Inverse transform `u = f^{-1}(v)` on `[0, f(u*)]` by bracketed
    /// monotone root finding.
    pub fn kirchhoff_inv(&self, v: f64) -> Result<f64, ConstitutiveError> {
        let v_star = self.v_star();
        if !(0.0..=v_star).contains(&v) {
            return Err(ConstitutiveError::OutOfRange { what: "v", value: v, lo: 0.0, hi: v_star });
        }
        Ok(self.f_inv_extended(v, None))
    }

    /// `f^{-1}(v)` for any `v >= 0`, extending the bracket beyond `u*` when
    /// needed. `guess` warm-starts the safeguarded Newton iteration.
    pub fn f_inv_extended(&self, v: f64, guess: Option<f64>) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        let mut hi = self.u_star;
        while self.f(hi) < v {
            hi *= 2.0;
            if !hi.is_finite() {
                return f64::INFINITY;
            }
        }
        let g = guess.unwrap_or(f64::NAN);
        let xtol = 1e-15 * hi;
        let root = newton_bracketed(|u| self.f(u) - v, |u| self.f_prime(u), 0.0, hi, g, xtol * 1e-3);
        root.max(0.0)
    }
}

fn probe_positive(p: &dyn Fn(f64) -> f64, u_star: f64) -> Result<(), ConstitutiveError> {
    for k in 1..=SCAN_POINTS {
        let v = u_star * k as f64 / SCAN_POINTS as f64;
        let pv = p(v);
        if !(pv > 0.0) || !pv.is_finite() {
            return Err(ConstitutiveError::NonPositiveP { v, p: pv });
        }
    }
    Ok(())
}

/// Limit of `P` at `0` from samples at `u* 2^-k`, `k = 10..=20`, by
/// repeated Aitken extrapolation (Richardson with estimated orders).
fn richardson_limit_at_zero(p: &dyn Fn(f64) -> f64, u_star: f64) -> f64 {
    let mut seq: Vec<f64> = (10..=20).map(|k| p(u_star * 2f64.powi(-k))).collect();
    let scale = seq.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    while seq.len() >= 3 {
        let mut next = Vec::with_capacity(seq.len() - 2);
        for w in seq.windows(3) {
            let (d1, d2) = (w[1] - w[0], w[2] - w[1]);
            let denom = d2 - d1;
            if d2.abs() <= 1e-15 * scale || denom.abs() <= 1e-15 * scale {
                next.clear();
                break;
            }
            next.push(w[2] - d2 * d2 / denom);
        }
        if next.is_empty() || next.iter().any(|x| !x.is_finite()) {
            break;
        }
        seq = next;
    }
    let limit = *seq.last().expect("non-empty");
    if limit.abs() <= 1e-12 * scale {
        0.0
    } else {
        limit.max(0.0)
    }
}

fn golden_section(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, minimize: bool) -> (f64, f64) {
    let sign = if minimize { 1.0 } else { -1.0 };
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = sign * f(c);
    let mut fd = sign * f(d);
    for _ in 0..120 {
        if (b - a).abs() <= 1e-15 * (1.0 + a.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = sign * f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = sign * f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// `(P♭, v♭, P♯, v♯)` from a 4096-point scan refined by golden section,
/// with the limit at 0 as an extra candidate.
fn scan_bounds(p: &dyn Fn(f64) -> f64, u_star: f64, p_zero: f64) -> (f64, f64, f64, f64) {
    let n = SCAN_POINTS;
    let grid: Vec<f64> = (1..=n).map(|k| u_star * k as f64 / n as f64).collect();
    let vals: Vec<f64> = grid.iter().map(|&v| p(v)).collect();
    let (imin, imax) = vals.iter().enumerate().fold((0, 0), |(lo, hi), (i, &x)| {
        (if x < vals[lo] { i } else { lo }, if x > vals[hi] { i } else { hi })
    });
    let refine = |i: usize, minimize: bool| -> (f64, f64) {
        let a = if i == 0 { grid[0] * 0.5 } else { grid[i - 1] };
        let b = grid[(i + 1).min(n - 1)];
        let (x, fx) = golden_section(p, a, b, minimize);
        let better = if minimize { fx < vals[i] } else { fx > vals[i] };
        if better {
            (fx, x)
        } else {
            (vals[i], grid[i])
        }
    };
    let (mut p_flat, mut v_flat) = refine(imin, true);
    let (mut p_sharp, mut v_sharp) = refine(imax, false);
    if p_zero <= p_flat {
        p_flat = p_zero;
        v_flat = 0.0;
    }
    if p_zero >= p_sharp {
        p_sharp = p_zero;
        v_sharp = 0.0;
    }
    (p_flat, v_flat, p_sharp, v_sharp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn power_law_constant_p() {
        let m = SoilModel::from_power_law(1.0, 1.0, 2.0, 0.0, 1.0).unwrap();
        for u in [0.1, 0.5, 1.0] {
            assert!(close(m.p(u), 1.0, 1e-14));
        }
        assert_eq!(m.p_flat(), 1.0);
        assert_eq!(m.p_sharp(), 1.0);
        assert!(close(m.q_star(), 1.0, 1e-14));
    }

    #[test]
    fn power_law_unit_cg_gives_p_two() {
        // f = u^2, g = u: P = 2u / u = 2 everywhere.
        let m = SoilModel::from_power_law(1.0, 1.0, 1.0, 0.0, 1.0).unwrap();
        assert!(close(m.p(0.3), 2.0, 1e-14));
        assert_eq!(m.p_flat(), 2.0);
        assert_eq!(m.p_sharp(), 2.0);
        assert!(close(m.q_star(), 2.0, 1e-14));
    }

    #[test]
    fn power_law_boundary_rejected() {
        let err = SoilModel::from_power_law(1.0, 0.5, 1.0, 0.5, 1.0).unwrap_err();
        assert!(matches!(err, ConstitutiveError::Admissibility(_)));
        assert!(SoilModel::from_power_law(1.0, 0.0, 1.0, -0.5, 1.0).is_err());
        assert!(SoilModel::from_power_law(1.0, 1.0, 1.0, -1.0, 1.0).is_err());
        assert!(SoilModel::from_power_law(-1.0, 1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn power_law_growing_p_bounds() {
        // P = 2 u^(0.5) with p = 1.5, q = 0, C_f = C_g = 1: coefficient 2.5.
        let m = SoilModel::from_power_law(1.0, 1.5, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(m.p_flat(), 0.0);
        assert!(close(m.p_sharp(), 2.5, 1e-14));
        assert_eq!(m.p_zero(), 0.0);
        assert!(close(m.q_star(), 2.5 / 1.5, 1e-14));
    }

    #[test]
    fn p_star_examples() {
        let c = SoilModel::from_preset(PresetP::Const, 1.0).unwrap();
        assert!(close(c.q_star(), 1.0, 1e-12));
        assert_eq!(c.p_flat(), 1.0);
        assert_eq!(c.p_sharp(), 1.0);

        let inv = SoilModel::from_preset(PresetP::InvSqrt, 1.0).unwrap();
        let expect = 0.4 * (6f64.sqrt() - 1.0);
        assert!(close(inv.q_star(), expect, 1e-10), "{}", inv.q_star());
        assert!(close(inv.p_sharp(), 1.0, 1e-12));
        assert!(close(inv.p_flat(), 1.0 / 6f64.sqrt(), 1e-12));
        assert!(close(inv.p_zero(), 1.0, 1e-6));

        let s = SoilModel::from_preset(PresetP::Sqrt, 1.0).unwrap();
        assert_eq!(s.p_flat(), 0.0);
        assert!(close(s.p_sharp(), 1.0, 1e-12));
        assert!(close(s.q_star(), 2.0 / 3.0, 1e-10));
        assert_eq!(s.p_zero(), 0.0);
    }

    #[test]
    fn custom_p_matches_preset() {
        let m = SoilModel::from_p_star(|v| (1.0 + 5.0 * v).powf(-0.5), None, 1.0).unwrap();
        let r = SoilModel::from_preset(PresetP::InvSqrt, 1.0).unwrap();
        for u in [1e-3, 0.2, 0.9, 1.0] {
            assert!(close(m.f(u), r.f(u), 1e-13), "u={u}");
        }
        assert!(m.f_second(0.5).is_none());
        assert!(close(m.q_star(), r.q_star(), 1e-10));
    }

    #[test]
    fn non_positive_p_rejected() {
        let err = SoilModel::from_p_star(|v| v - 0.5, None, 1.0).unwrap_err();
        assert!(matches!(err, ConstitutiveError::NonPositiveP { .. }));
    }

    #[test]
    fn kirchhoff_examples() {
        let m = SoilModel::from_power_law(1.0, 1.0, 2.0, 0.0, 1.0).unwrap();
        assert!(close(m.kirchhoff(0.5).unwrap(), 0.25, 1e-15));
        assert!(close(m.kirchhoff_inv(0.25).unwrap(), 0.5, 1e-13));
        assert_eq!(m.kirchhoff(0.0).unwrap(), 0.0);
        let c = SoilModel::from_preset(PresetP::Const, 1.0).unwrap();
        assert!(close(c.kirchhoff(0.3).unwrap(), 0.045, 1e-15));
        assert!(matches!(m.kirchhoff(1.5), Err(ConstitutiveError::OutOfRange { .. })));
        assert!(matches!(m.kirchhoff_inv(-0.1), Err(ConstitutiveError::OutOfRange { .. })));
    }

    #[test]
    fn tabulated_model() {
        let table: Vec<[f64; 2]> = (0..=32).map(|k| {
            let v = k as f64 / 32.0;
            [v, v.sqrt()]
        }).collect();
        let m = SoilModel::from_table(&table, 1.0).unwrap();
        assert!(close(m.p_sharp(), 1.0, 1e-12));
        assert!(m.p_flat() < 1e-12);
        assert!(close(m.q_star(), 2.0 / 3.0, 2e-3));
        assert!(m.f_second(0.5).is_some());
        assert!(SoilModel::from_table(&[[0.1, 1.0], [1.0, 1.0]], 1.0).is_err());
        assert!(SoilModel::from_table(&[[0.0, 1.0], [0.5, 1.0]], 1.0).is_err());
    }

    #[test]
    fn conductivity_construction() {
        // κ(θ) = θ with g(u) = u gives f = u^2/2 and P = 1.
        let law = ConductivityLaw {
            kappa: Arc::new(|t| t),
            dkappa: Some(Arc::new(|_| 1.0)),
            g: Arc::new(|u| u),
            dg: Arc::new(|_| 1.0),
        };
        let m = SoilModel::from_conductivity(law, 1.0).unwrap();
        assert!(close(m.f(0.3), 0.045, 1e-13));
        assert!(close(m.p_sharp(), 1.0, 1e-12));
        assert!(close(m.p_flat(), 1.0, 1e-12));
    }

    fn all_models() -> Vec<SoilModel> {
        let mut v: Vec<SoilModel> = PresetP::ALL.iter().map(|&p| SoilModel::from_preset(p, 1.0).unwrap()).collect();
        v.push(SoilModel::from_power_law(1.0, 3.0, 1.0, 0.0, 1.0).unwrap());
        v.push(SoilModel::from_power_law(0.5, 1.0, 2.0, 0.0, 2.0).unwrap());
        v
    }

    #[test]
    fn round_trip_on_dense_grid() {
        for m in all_models() {
            for k in 0..=1000 {
                let u = m.u_star() * k as f64 / 1000.0;
                let back = m.kirchhoff_inv(m.kirchhoff(u).unwrap()).unwrap();
                assert!((back - u).abs() <= 1e-10 * u.max(1e-300) + 1e-300, "{m:?} u={u} back={back}");
                let v = m.f(u);
                assert!((m.f(back) - v).abs() <= 1e-12 * v.max(1.0));
            }
        }
    }

    #[test]
    fn f_and_g_strictly_increasing() {
        for m in all_models() {
            let mut prev = (m.f(0.0), m.g(0.0));
            for k in 1..=2000 {
                let u = m.u_star() * k as f64 / 2000.0;
                let cur = (m.f(u), m.g(u));
                assert!(cur.0 > prev.0 && cur.1 > prev.1, "{m:?} at u={u}");
                prev = cur;
            }
        }
    }

    #[test]
    fn hypothesis_one_structure() {
        for m in all_models() {
            assert_eq!(m.f(0.0), 0.0);
            assert_eq!(m.f_prime(0.0), 0.0);
            assert_eq!(m.g(0.0), 0.0);
            assert!(m.p_flat() <= m.p_zero() && m.p_zero() <= m.p_sharp());
            assert!(m.q_star() > 0.0 && m.q_star() <= m.p_sharp() * m.u_star() * (1.0 + 1e-12));
        }
    }

    proptest! {
        #[test]
        fn p_within_bounds(k in 0usize..6, v in 1e-9f64..1.0) {
            let m = &all_models()[k];
            let u = v * m.u_star();
            let p = m.p(u);
            prop_assert!(p >= m.p_flat() - 1e-9 && p <= m.p_sharp() + 1e-9);
        }

        #[test]
        fn power_law_verdict_matches_condition(p in -1.0f64..3.0, q in -1.5f64..4.0) {
            let law = PowerLaw { c_f: 1.0, p, c_g: 1.0, q };
            let expected = p > 0.0 && -1.0 < q && q < 2.0 * p - 1.0;
            prop_assert_eq!(SoilModel::from_power_law(1.0, p, 1.0, q, 1.0).is_ok(), expected);
            let m = SoilModel::power_law_unchecked(law, 1.0).unwrap();
            prop_assert_eq!(*m.admissibility() == Admissibility::Admissible, expected);
        }
    }
}
