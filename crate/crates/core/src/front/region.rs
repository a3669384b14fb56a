use super::{classify, require_bounded, FrontError, UpwardCase};
use crate::constitutive::SoilModel;
use serde::Serialize;
use std::f64::consts::PI;

/// Envelope samples are restricted to `|cos ω|` at or above this value.
pub const ENVELOPE_MIN_COS: f64 = 1e-3;

const ENVELOPE_SAMPLES: usize = 721;

/// Geometry of one bound in the `(x_⊥, x_N)` plane, `x_N` pointing up.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionShape {
    /// `{x_N ≥ apex, |x_⊥| ≤ r} ∪ {|x - (0, apex)| ≤ r}`.
    CylinderHalfBall { radius: f64, apex: f64 },
    /// Convex hull of the balls of radius `r` centred at `(0, top)` and
    /// `(0, bottom)`.
    TwoBallHull { radius: f64, top: f64, bottom: f64 },
    /// Region below the envelope of the lines
    /// `x_⊥ sin ω + x_N |cos ω| = R₀ + u*/|cos ω|`, intersected with the
    /// time-dependent cap of radius `cap_radius` about the origin.
    StationaryEnvelope { r0: f64, u_star: f64, cap_radius: f64, samples: Vec<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionBound {
    pub t: f64,
    pub shape: RegionShape,
}

/// Maximises a concave function on `[a, b]`.
fn concave_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= 1e-15 {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    f(0.5 * (a + b)).max(fc).max(fd).max(f(b))
}

/// `sup_{c ∈ (0,1]} |x_⊥| sqrt(1-c²) + x_N c - r`: signed distance to the
/// upper half-ball of radius `r` with a downward cylinder.
fn cap_excess(xp: f64, xn: f64, r: f64) -> f64 {
    if xn <= 0.0 {
        xp - r
    } else {
        xp.hypot(xn) - r
    }
}

impl RegionBound {
    /// Amount by which `(x_⊥, x_N)` lies outside; non-positive inside.
    /// For the ball-based shapes this is the Euclidean distance to the set.
    pub fn excess(&self, x_perp: f64, x_n: f64) -> f64 {
        let xp = x_perp.abs();
        match &self.shape {
            RegionShape::CylinderHalfBall { radius, apex } => {
                if x_n >= *apex {
                    xp - radius
                } else {
                    xp.hypot(x_n - apex) - radius
                }
            }
            RegionShape::TwoBallHull { radius, top, bottom } => {
                let dn = if x_n > *top {
                    x_n - top
                } else if x_n < *bottom {
                    x_n - bottom
                } else {
                    0.0
                };
                xp.hypot(dn) - radius
            }
            RegionShape::StationaryEnvelope { r0, u_star, cap_radius, .. } => {
                let phi = |c: f64| xp * (1.0 - c * c).max(0.0).sqrt() + x_n * c - r0 - u_star / c;
                let env = concave_max(phi, 1e-12, 1.0);
                env.max(cap_excess(xp, x_n, *cap_radius))
            }
        }
    }

    pub fn contains(&self, x_perp: f64, x_n: f64) -> bool {
        self.excess(x_perp, x_n) <= 0.0
    }

    /// Boundary polyline; unbounded shapes are cut at `x_N = top` (lower)
    /// or `x_N = bottom` (envelope cap).
    pub fn polyline(&self, n: usize, cut: f64) -> Vec<[f64; 2]> {
        let n = n.max(8);
        match &self.shape {
            RegionShape::CylinderHalfBall { radius, apex } => {
                let mut pts = vec![[-radius, cut.max(*apex)]];
                for k in 0..=n {
                    let a = PI + PI * k as f64 / n as f64;
                    pts.push([radius * a.cos(), apex + radius * a.sin()]);
                }
                pts.push([*radius, cut.max(*apex)]);
                pts
            }
            RegionShape::TwoBallHull { radius, top, bottom } => {
                let mut pts = Vec::with_capacity(2 * n + 3);
                for k in 0..=n {
                    let a = PI * k as f64 / n as f64;
                    pts.push([radius * a.cos(), top + radius * a.sin()]);
                }
                for k in 0..=n {
                    let a = PI + PI * k as f64 / n as f64;
                    pts.push([radius * a.cos(), bottom + radius * a.sin()]);
                }
                pts.push(pts[0]);
                pts
            }
            RegionShape::StationaryEnvelope { samples, .. } => samples.clone(),
        }
    }
}

/// Lower and upper bounds at one time; the wet region lies in both.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionBounds {
    pub t: f64,
    pub lower: RegionBound,
    pub upper: RegionBound,
}

impl RegionBounds {
    pub fn excess(&self, x_perp: f64, x_n: f64) -> f64 {
        self.lower.excess(x_perp, x_n).max(self.upper.excess(x_perp, x_n))
    }

    pub fn contains(&self, x_perp: f64, x_n: f64) -> bool {
        self.excess(x_perp, x_n) <= 0.0
    }
}

/// Contact points of the stationary envelope for `ω ∈ (π/2, 3π/2)` with
/// `|cos ω| ≥` [`ENVELOPE_MIN_COS`].
pub fn envelope_samples(r0: f64, u_star: f64, n: usize) -> Vec<[f64; 2]> {
    let delta = ENVELOPE_MIN_COS.asin();
    (0..n)
        .map(|k| {
            let w = PI / 2.0 + delta + (PI - 2.0 * delta) * k as f64 / (n - 1) as f64;
            let (s, c) = w.sin_cos();
            let ac = c.abs();
            [(r0 + 2.0 * u_star / ac) * s, r0 * ac + u_star * (1.0 - s * s / (c * c))]
        })
        .collect()
}

/// Bounding geometry of the wet region at time `t`.
pub fn region_bound(model: &SoilModel, r0: f64, t: f64) -> Result<RegionBounds, FrontError> {
    require_bounded(model)?;
    if !(r0 > 0.0) {
        return Err(FrontError::NonPositiveR0(r0));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(FrontError::InvalidTimes);
    }
    let r = r0 + 2.0 * (model.q_star() * t).sqrt();
    let lower = RegionBound { t, shape: RegionShape::CylinderHalfBall { radius: r, apex: -t * model.p_sharp() } };
    let upper_shape = match classify(model)? {
        UpwardCase::Case1 => RegionShape::TwoBallHull { radius: r, top: -t * model.p_flat(), bottom: -t * model.p_sharp() },
        UpwardCase::Case2a | UpwardCase::Case2b => RegionShape::StationaryEnvelope {
            r0,
            u_star: model.u_star(),
            cap_radius: r,
            samples: envelope_samples(r0, model.u_star(), ENVELOPE_SAMPLES),
        },
    };
    Ok(RegionBounds { t, lower, upper: RegionBound { t, shape: upper_shape } })
}
