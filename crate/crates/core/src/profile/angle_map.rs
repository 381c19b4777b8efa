//! The monotone reparametrization `φ(θ)` through which the angular profile
//! has a closed form.
//!
//! For `2 < p ≤ ∞` (with `a = 1` at `p = ∞`)
//!
//! ```text
//! φ(θ) = θ − (1 − 1/k)·√(ak)/√(ak−1)·[atan(λ tan(θ/2)) + atan(tan(θ/2)/λ)],
//! λ = √(ak−1)/(√(ak)+1),
//! ```
//!
//! which is the antiderivative of `(a − cos²θ)/(ak − cos²θ)` vanishing at 0.
//! It is odd, strictly increasing on `(−π, π)`, sends `±π/2` to the sector
//! sides `±π/(2ν)` and `±π` to `±π/ν`.
//!
//! At `p = ∞` with `ν ≤ 1` the exponent is `k = 1`, so `ak = 1` and the
//! formula degenerates. Its limit is a map with a jump at `θ = 0`: the inverse
//! `θ(φ)` vanishes on the plateau `|φ| ≤ (1/ν − 1)π/2` and is a unit-slope
//! shift outside it. The resulting profile is `1` on the plateau (a cone
//! `u = r`) and `cos` of the shifted angle outside (a plane).

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{domain, Result};
use crate::exponent::{radial_exponent, PExponent, SectorSpec};

/// Smallest `a·k − 1` treated as a regular map.
const DEGENERATE_AK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
enum MapKind {
    Regular {
        /// `λ_{ν,p}`.
        lam: f64,
        /// `(1 − 1/k)·√(ak/(ak−1))`.
        coef: f64,
    },
    /// Degenerate `p = ∞`, `ν ≤ 1` map; `half_width` is the plateau half-width.
    Plateau { half_width: f64 },
}

/// Angle map for `2 < p ≤ ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleMap {
    sector: SectorSpec,
    p: PExponent,
    a: f64,
    k: f64,
    kind: MapKind,
}

impl AngleMap {
    /// Absolute accuracy of [`theta_of_phi`] in `θ`.
    pub const TOLERANCE: f64 = 1e-12;

    pub fn new(sector: SectorSpec, p: PExponent) -> Result<Self> {
        if let Some(v) = p.value() {
            if v <= 2.0 {
                return Err(domain("the angle map requires p > 2"));
            }
        }
        let a = p.a().expect("a is defined for p > 2");
        let k = radial_exponent(sector, p).k;
        let ak = a * k;
        let kind = if ak - 1.0 > DEGENERATE_AK {
            MapKind::Regular {
                lam: (ak - 1.0).sqrt() / (ak.sqrt() + 1.0),
                coef: (1.0 - 1.0 / k) * (ak / (ak - 1.0)).sqrt(),
            }
        } else if p.is_infinite() {
            MapKind::Plateau {
                half_width: (1.0 / sector.nu() - 1.0) * FRAC_PI_2,
            }
        } else {
            return Err(domain(format!("angle map requires a*k > 1 (got {ak})")));
        };
        Ok(AngleMap { sector, p, a, k, kind })
    }

    pub fn sector(&self) -> SectorSpec {
        self.sector
    }
    pub fn nu(&self) -> f64 {
        self.sector.nu()
    }
    pub fn p(&self) -> PExponent {
        self.p
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn k(&self) -> f64 {
        self.k
    }

    /// `λ_{ν,p}`; zero for the degenerate plateau map.
    pub fn lam_arctan(&self) -> f64 {
        match self.kind {
            MapKind::Regular { lam, .. } => lam,
            MapKind::Plateau { .. } => 0.0,
        }
    }

    /// Half-width of the cone plateau of the degenerate `p = ∞` map.
    pub fn plateau_half_width(&self) -> Option<f64> {
        match self.kind {
            MapKind::Plateau { half_width } => Some(half_width),
            MapKind::Regular { .. } => None,
        }
    }

    /// Normalization `c = ((ak−1)/(ak))^{−(k−1)/2}` making `f(0) = 1`.
    pub fn normalization(&self) -> f64 {
        match self.kind {
            MapKind::Regular { .. } => {
                let ak = self.a * self.k;
                ((ak - 1.0) / ak).powf(-(self.k - 1.0) / 2.0)
            }
            MapKind::Plateau { .. } => 1.0,
        }
    }

    /// `φ(θ)` for `θ ∈ [−π, π]`.
    pub fn phi_of_theta(&self, theta: f64) -> Result<f64> {
        if !(theta.abs() <= PI) {
            return Err(domain("theta must lie in [-pi, pi]"));
        }
        let t = theta.abs();
        let phi = match self.kind {
            MapKind::Regular { lam, coef } => {
                // For t > π/2 use atan(x) = π/2 − atan(1/x) on both terms, which
                // keeps tan(·) bounded up to and including t = π.
                let bracket = if t <= FRAC_PI_2 {
                    let s = (0.5 * t).tan();
                    (lam * s).atan() + (s / lam).atan()
                } else {
                    let u = (0.5 * (PI - t)).tan();
                    PI - (u / lam).atan() - (lam * u).atan()
                };
                t - coef * bracket
            }
            MapKind::Plateau { half_width } => {
                if t == 0.0 {
                    0.0
                } else {
                    t + half_width
                }
            }
        };
        Ok(phi.copysign(theta))
    }

    /// `dφ/dθ = (a − cos²θ)/(ak − cos²θ)`.
    pub fn dphi_dtheta(&self, theta: f64) -> f64 {
        match self.kind {
            MapKind::Regular { .. } => {
                let c2 = theta.cos().powi(2);
                (self.a - c2) / (self.a * self.k - c2)
            }
            MapKind::Plateau { .. } => 1.0,
        }
    }

    /// The unique `θ` with `φ(θ) = phi`, for `|phi| ≤ π/ν`.
    ///
    /// Bracketed Newton iteration on the strictly increasing map, falling
    /// back to bisection whenever a step leaves the bracket.
    pub fn theta_of_phi(&self, phi: f64) -> Result<f64> {
        let limit = PI / self.nu();
        if !(phi.abs() <= limit * (1.0 + 1e-14)) {
            return Err(domain(format!("|phi| must be <= pi/nu = {limit}")));
        }
        let target = phi.abs().min(limit);
        let theta = match self.kind {
            MapKind::Plateau { half_width } => (target - half_width).max(0.0),
            MapKind::Regular { .. } => self.invert_regular(target),
        };
        Ok(theta.copysign(phi))
    }

    fn invert_regular(&self, target: f64) -> f64 {
        if target == 0.0 {
            return 0.0;
        }
        let limit = PI / self.nu();
        if target >= limit {
            return PI;
        }
        let eval = |t: f64| self.phi_of_theta(t).expect("t in [0, pi]") - target;
        let (mut lo, mut hi) = (0.0_f64, PI);
        let mut t = (target / limit * PI).clamp(0.0, PI);
        for _ in 0..200 {
            let g = eval(t);
            if g == 0.0 {
                return t;
            }
            if g < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let d = self.dphi_dtheta(t);
            let mut next = t - g / d;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            let step = (next - t).abs();
            t = next;
            if step <= 2.0 * f64::EPSILON * t.max(f64::MIN_POSITIVE) || hi - lo <= 2.0 * f64::EPSILON * hi {
                break;
            }
        }
        t
    }

    /// `f` and `f′` at a given `θ`:
    /// `f = ((ak − cos²θ)/(ak − 1))^{(k−1)/2} cos θ` and
    /// `f′ = −k ((ak − cos²θ)/(ak − 1))^{(k−1)/2} sin θ`, i.e. the closed form
    /// with the normalization folded in.
    pub fn profile_at_theta(&self, theta: f64) -> (f64, f64) {
        let (s, c) = theta.sin_cos();
        match self.kind {
            MapKind::Regular { .. } => {
                let ak = self.a * self.k;
                let w = ((ak - c * c) / (ak - 1.0)).powf(0.5 * (self.k - 1.0));
                (w * c, -self.k * w * s)
            }
            MapKind::Plateau { .. } => (c, -s),
        }
    }

    /// `(θ, f, f′)` at angle `phi`.
    pub fn eval(&self, phi: f64) -> Result<(f64, f64, f64)> {
        let theta = self.theta_of_phi(phi)?;
        let (f, fp) = self.profile_at_theta(theta);
        Ok((theta, f, fp))
    }
}

/// Free-function form of [`AngleMap::phi_of_theta`].
pub fn phi_of_theta(theta: f64, map: &AngleMap) -> Result<f64> {
    map.phi_of_theta(theta)
}

/// Free-function form of [`AngleMap::theta_of_phi`].
pub fn theta_of_phi(phi: f64, map: &AngleMap) -> Result<f64> {
    map.theta_of_phi(phi)
}

/// `f(φ)` for `2 < p ≤ ∞`, normalized so that `f(0) = 1`.
pub fn eval_f(phi: f64, map: &AngleMap) -> Result<f64> {
    map.eval(phi).map(|(_, f, _)| f)
}

/// `f′(φ)` for `2 < p ≤ ∞`.
pub fn eval_fprime(phi: f64, map: &AngleMap) -> Result<f64> {
    map.eval(phi).map(|(_, _, fp)| fp)
}
