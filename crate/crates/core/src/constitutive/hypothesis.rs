use super::{Admissibility, ConstitutiveError, SoilKind, SoilModel};
use crate::numeric::quadrature::{integrate_singular, Integral, Rule, Tolerance};
use serde::Serialize;

/// Outcome of [`check_hypothesis`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    /// `∫_0^{u*} |f''|^2 / g'`, or `+inf` when divergent.
    pub h_u_star: f64,
    pub divergent: bool,
    /// Smallest `f'` and `g'` seen on the probe grid.
    pub min_f_prime: f64,
    pub min_g_prime: f64,
    /// `Some` for power laws: the exponent condition `p > 0, -1 < q < 2p - 1`.
    pub closed_form_verdict: Option<bool>,
    pub admissible: bool,
}

/// Numerically checks the structural hypothesis on `(f, g)`: positivity of
/// `f'` and `g'` on `probes` points of `(0, u*]` and finiteness of
/// `∫_0^{u*} |f''|^2 / g'`.
pub fn check_hypothesis(model: &SoilModel, probes: usize) -> Result<AdmissibilityReport, ConstitutiveError> {
    if probes < 16 {
        return Err(ConstitutiveError::InvalidParameter(format!("probes must be at least 16, got {probes}")));
    }
    let u_star = model.u_star();
    if model.f_second(0.5 * u_star).is_none() {
        return Err(ConstitutiveError::NotEvaluable);
    }
    let (mut min_fp, mut min_gp) = (f64::INFINITY, f64::INFINITY);
    for k in 1..=probes {
        let u = u_star * k as f64 / probes as f64;
        min_fp = min_fp.min(model.f_prime(u));
        min_gp = min_gp.min(model.g_prime(u));
    }
    let integrand = |z: f64| {
        let fs = model.f_second(z).unwrap_or(f64::NAN);
        fs * fs / model.g_prime(z)
    };
    let h = integrate_singular(Rule::Simpson, &integrand, 0.0, u_star, &[0.0], Tolerance::new(1e-10, 1e-300));
    let divergent = !h.is_finite();
    let closed_form_verdict = match model.kind() {
        SoilKind::PowerLaw(pl) => Some(pl.is_admissible()),
        _ => None,
    };
    let numeric_ok = !divergent && min_fp > 0.0 && min_gp > 0.0;
    let admissible = match closed_form_verdict {
        Some(v) => v,
        None => numeric_ok && *model.admissibility() == Admissibility::Admissible,
    };
    Ok(AdmissibilityReport {
        h_u_star: match h {
            Integral::Finite(v) => v,
            Integral::Divergent => f64::INFINITY,
        },
        divergent,
        min_f_prime: min_fp,
        min_g_prime: min_gp,
        closed_form_verdict,
        admissible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{PowerLaw, PresetP};

    #[test]
    fn linear_quadratic_power_law_is_finite() {
        let m = SoilModel::from_power_law(1.0, 1.0, 1.0, 0.0, 1.0).unwrap();
        let r = check_hypothesis(&m, 64).unwrap();
        assert!(!r.divergent);
        assert!((r.h_u_star - 4.0).abs() < 1e-10);
        assert!(r.admissible);
    }

    #[test]
    fn shallow_power_law_diverges() {
        let law = PowerLaw { c_f: 1.0, p: 0.25, c_g: 1.0, q: 0.0 };
        let m = SoilModel::power_law_unchecked(law, 1.0).unwrap();
        let r = check_hypothesis(&m, 64).unwrap();
        assert!(r.divergent);
        assert_eq!(r.closed_form_verdict, Some(false));
        assert!(!r.admissible);
    }

    #[test]
    fn constant_p_is_finite() {
        let m = SoilModel::from_preset(PresetP::Const, 1.0).unwrap();
        let r = check_hypothesis(&m, 16).unwrap();
        assert!((r.h_u_star - 1.0).abs() < 1e-10);
        assert!(r.admissible);
    }

    #[test]
    fn sqrt_preset_integrable_singularity() {
        // f'' = 1.5 sqrt(u), so the integrand is 2.25 u with integral 1.125.
        let m = SoilModel::from_preset(PresetP::Sqrt, 1.0).unwrap();
        let r = check_hypothesis(&m, 32).unwrap();
        assert!((r.h_u_star - 1.125).abs() < 1e-9, "{}", r.h_u_star);
    }

    #[test]
    fn missing_second_derivative_not_evaluable() {
        let m = SoilModel::from_p_star(|v| 1.0 + v, None, 1.0).unwrap();
        assert_eq!(check_hypothesis(&m, 32), Err(ConstitutiveError::NotEvaluable));
        let m = SoilModel::from_preset(PresetP::Const, 1.0).unwrap();
        assert!(check_hypothesis(&m, 8).is_err());
    }
}
