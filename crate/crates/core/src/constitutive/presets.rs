use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// The four reference pressure-ratio functions `P(v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PresetP {
    /// `P(v) = (1 + 5v)^(-1/2)`
    #[serde(rename = "p_invsqrt")]
    InvSqrt,
    /// `P(v) = 1`
    #[serde(rename = "p_const")]
    Const,
    /// `P(v) = v`
    #[serde(rename = "p_linear")]
    Linear,
    /// `P(v) = v^(1/2)`
    #[serde(rename = "p_sqrt")]
    Sqrt,
}

impl PresetP {
    pub const ALL: [PresetP; 4] = [PresetP::InvSqrt, PresetP::Const, PresetP::Linear, PresetP::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            PresetP::InvSqrt => "p_invsqrt",
            PresetP::Const => "p_const",
            PresetP::Linear => "p_linear",
            PresetP::Sqrt => "p_sqrt",
        }
    }

    pub fn formula(self) -> &'static str {
        match self {
            PresetP::InvSqrt => "(1+5v)^(-1/2)",
            PresetP::Const => "1",
            PresetP::Linear => "v",
            PresetP::Sqrt => "v^(1/2)",
        }
    }

    pub fn p(self, v: f64) -> f64 {
        match self {
            PresetP::InvSqrt => 1.0 / (1.0 + 5.0 * v).sqrt(),
            PresetP::Const => 1.0,
            PresetP::Linear => v,
            PresetP::Sqrt => v.max(0.0).sqrt(),
        }
    }

    pub fn dp(self, v: f64) -> f64 {
        match self {
            PresetP::InvSqrt => -2.5 * (1.0 + 5.0 * v).powf(-1.5),
            PresetP::Const => 0.0,
            PresetP::Linear => 1.0,
            PresetP::Sqrt => 0.5 / v.sqrt(),
        }
    }

    /// `f(u) = ∫_0^u P(s) s ds` in closed form.
    pub fn kirchhoff(self, u: f64) -> f64 {
        match self {
            PresetP::InvSqrt => {
                // (2/3) u^2 (y + 2) / (y + 1)^2 with y = sqrt(1 + 5u); this
                // form avoids cancellation near u = 0.
                let y = (1.0 + 5.0 * u).sqrt();
                2.0 / 3.0 * u * u * (y + 2.0) / ((y + 1.0) * (y + 1.0))
            }
            PresetP::Const => 0.5 * u * u,
            PresetP::Linear => u * u * u / 3.0,
            PresetP::Sqrt => 0.4 * u * u * u.sqrt(),
        }
    }
}

impl fmt::Display for PresetP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PresetP {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().replace(' ', "");
        PresetP::ALL
            .into_iter()
            .find(|p| p.name() == key || p.formula() == key)
            .ok_or_else(|| format!("unknown preset `{s}` (expected one of p_invsqrt, p_const, p_linear, p_sqrt)"))
    }
}
