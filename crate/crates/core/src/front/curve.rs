use super::gamma::{GammaTable, HalfSpace, Kernel};
use super::{classify, require_bounded, Direction, FrontError, UpwardCase};
use crate::constitutive::SoilModel;
use crate::exec::Execution;
use serde::{Deserialize, Serialize};
use std::sync::{Arc, OnceLock};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    SingularPhase,
    LinearPhase,
    Stationary,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::SingularPhase => "singular",
            Regime::LinearPhase => "linear",
            Regime::Stationary => "stationary",
        }
    }
}

/// Sampled front `R^ω(t)` with its speed and phase.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontCurve {
    pub omega: Direction,
    pub r0: f64,
    pub times: Vec<f64>,
    pub radius: Vec<f64>,
    pub speed: Vec<f64>,
    pub regime: Vec<Regime>,
    /// `T♯` (lower) or `T♭` (upper), possibly `+inf`.
    pub t_critical: Option<f64>,
    /// `T⁰` (upper half only).
    pub t_zero: Option<f64>,
    /// Upper half-space classification.
    pub case: Option<UpwardCase>,
    /// `R̈(T♯-)`; the second derivative vanishes after `T♯`.
    pub curvature_jump: Option<f64>,
}

/// Per half-space data shared across directions.
#[derive(Debug)]
struct HalfData {
    table: GammaTable,
    /// `∫ P / D`, the offset of the linear phase.
    linear_offset: f64,
    /// `Γ` at `z = 0` (upper) or unused.
    gamma_at_zero: f64,
    /// `∫ P / D³`.
    third_moment: f64,
}

/// Front evaluator that tabulates `Γ⁻¹` once per half-space.
#[derive(Debug)]
pub struct FrontAnalyzer {
    model: SoilModel,
    exec: Execution,
    lower: OnceLock<Arc<HalfData>>,
    upper: OnceLock<Arc<HalfData>>,
}

impl FrontAnalyzer {
    pub fn new(model: SoilModel) -> Result<Self, FrontError> {
        Self::with_execution(model, Execution::best())
    }

    pub fn with_execution(model: SoilModel, exec: Execution) -> Result<Self, FrontError> {
        require_bounded(&model)?;
        Ok(Self { model, exec, lower: OnceLock::new(), upper: OnceLock::new() })
    }

    pub fn model(&self) -> &SoilModel {
        &self.model
    }

    fn kernel(&self, half: HalfSpace) -> Kernel<'_> {
        Kernel::new(&self.model, half)
    }

    fn data(&self, half: HalfSpace) -> &HalfData {
        let cell = match half {
            HalfSpace::Lower => &self.lower,
            HalfSpace::Upper => &self.upper,
        };
        cell.get_or_init(|| {
            let k = self.kernel(half);
            let table = GammaTable::build(&k, self.exec);
            let finite = table.k_crit.is_finite();
            Arc::new(HalfData {
                linear_offset: if finite { k.flux(0.0) } else { f64::INFINITY },
                gamma_at_zero: match half {
                    HalfSpace::Lower => f64::NAN,
                    HalfSpace::Upper => k.gamma(self.model.p_flat()),
                },
                third_moment: if finite { k.moment(0.0, 3).value_or_inf() } else { f64::INFINITY },
                table,
            })
        })
    }

    /// `Γ(z_c)` of the half-space.
    pub fn critical_value(&self, half: HalfSpace) -> f64 {
        self.data(half).table.k_crit
    }

    /// `(Z(s), ∫_0^s Z)` where `Z` is `Γ₀⁻¹` or `Γ̂₀⁻¹`; requires `s < Γ(z_c)`.
    pub fn inverse_and_integral(&self, half: HalfSpace, s: f64) -> Result<(f64, f64), FrontError> {
        let d = self.data(half);
        let sg = s.sqrt();
        if sg <= d.table.sigma_max() {
            return Ok(d.table.eval(sg));
        }
        let k = self.kernel(half);
        let y = k.invert(s, d.table.k_crit)?.ok_or(FrontError::OutOfRange { s, sup: d.table.k_crit })?;
        // Integration by parts: ∫_0^s Z = s Z(s) + ∫_{Z(s)}^∞ Γ.
        let z = k.z_crit + y;
        Ok((z, s * z + k.flux(y)))
    }

    /// `(R, Ṙ, regime)` at one time.
    pub fn state(&self, omega: Direction, r0: f64, t: f64) -> Result<(f64, f64, Regime), FrontError> {
        let m = &self.model;
        if t == 0.0 {
            return Ok((r0, f64::INFINITY, Regime::SingularPhase));
        }
        if omega.is_lateral() {
            let q = m.q_star();
            return Ok((r0 + 2.0 * (q * t).sqrt(), (q / t).sqrt(), Regime::SingularPhase));
        }
        let half = omega.half_space();
        let c = omega.cos_omega.abs();
        let s = t * c * c;
        let d = self.data(half);
        if s < d.table.k_crit {
            let (z, int) = self.inverse_and_integral(half, s)?;
            return Ok((r0 + int / c, c * z, Regime::SingularPhase));
        }
        Ok(match half {
            HalfSpace::Lower => {
                let ps = m.p_sharp();
                (r0 + d.linear_offset / c + t * ps * c, ps * c, Regime::LinearPhase)
            }
            HalfSpace::Upper => {
                let pf = m.p_flat();
                let regime = if pf > 0.0 { Regime::LinearPhase } else { Regime::Stationary };
                (r0 + d.linear_offset / c - t * pf * c, -pf * c, regime)
            }
        })
    }

    /// Residual of the envelope identity
    /// `t Ṙ + R₀ + ∫ P / (Ṙ - P cos ω) - R` in the singular phase.
    pub fn clairaut_residual(&self, omega: Direction, r0: f64, t: f64) -> Result<f64, FrontError> {
        let (r, rdot, regime) = self.state(omega, r0, t)?;
        if regime != Regime::SingularPhase || omega.is_lateral() {
            return Err(FrontError::NotApplicable("residual is defined in the singular phase".into()));
        }
        let half = omega.half_space();
        let k = self.kernel(half);
        let c = omega.cos_omega.abs();
        let y = rdot / c - k.z_crit;
        Ok(t * rdot + r0 + k.flux(y) / c - r)
    }

    pub fn curve(&self, omega: Direction, r0: f64, times: &[f64]) -> Result<FrontCurve, FrontError> {
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(FrontError::NonPositiveR0(r0));
        }
        if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] < w[0]) {
            return Err(FrontError::InvalidTimes);
        }
        let n = times.len();
        let mut radius = Vec::with_capacity(n);
        let mut speed = Vec::with_capacity(n);
        let mut regime = Vec::with_capacity(n);
        for &t in times {
            let (r, v, g) = self.state(omega, r0, t)?;
            radius.push(r);
            speed.push(v);
            regime.push(g);
        }
        let (t_critical, t_zero, case, curvature_jump) = if omega.is_lateral() {
            (None, None, None, None)
        } else {
            let half = omega.half_space();
            let c = omega.cos_omega.abs();
            let d = self.data(half);
            let tc = d.table.k_crit / (c * c);
            match half {
                HalfSpace::Lower => {
                    let jump = tc.is_finite().then(|| {
                        if d.third_moment.is_finite() {
                            -c * c * c / (2.0 * d.third_moment)
                        } else {
                            0.0
                        }
                    });
                    (Some(tc), None, None, jump)
                }
                HalfSpace::Upper => (Some(tc), Some(d.gamma_at_zero / (c * c)), Some(classify(&self.model)?), None),
            }
        };
        Ok(FrontCurve {
            omega,
            r0,
            times: times.to_vec(),
            radius,
            speed,
            regime,
            t_critical,
            t_zero,
            case,
            curvature_jump,
        })
    }
}

/// Samples `R^ω` at `times`.
pub fn front_curve(model: &SoilModel, omega: Direction, r0: f64, times: &[f64]) -> Result<FrontCurve, FrontError> {
    FrontAnalyzer::new(model.clone())?.curve(omega, r0, times)
}
