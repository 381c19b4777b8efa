//! The radial exponent `k(ν, p)` of the separable p-harmonic function
//! `r^k f(φ)` in the sector of aperture `π/ν`.
//!
//! For finite `p` the exponent is the positive root of the algebraic
//! condition obtained from the angle map (see [`exponent_condition_residual`]);
//! for `p = ∞` it is the piecewise limit `1` (for `ν ≤ 1`) and `ν²/(2ν−1)`
//! (for `ν ≥ 1`).

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Below this distance from `ν = 1/2` the exponent uses its explicit limit.
pub const HALF_PLANE_LIMIT_EPS: f64 = 1e-8;

/// Planar sector `{ |φ| < π/(2ν) }` with apex at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SectorSpec {
    nu: f64,
}

impl SectorSpec {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu < 0.5 {
            return Err(domain("nu must be >= 0.5"));
        }
        Ok(SectorSpec { nu })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Half of the opening angle, `π/(2ν)`.
    pub fn half_aperture(&self) -> f64 {
        PI / (2.0 * self.nu)
    }

    /// Opening angle `π/ν`.
    pub fn aperture(&self) -> f64 {
        PI / self.nu
    }

    /// The concentric sector of half the opening angle, `S_{2ν}`.
    pub fn halved(&self) -> SectorSpec {
        SectorSpec { nu: 2.0 * self.nu }
    }

    pub(crate) fn at_half_plane_limit(&self) -> bool {
        (2.0 * self.nu - 1.0).abs() < HALF_PLANE_LIMIT_EPS
    }
}

impl TryFrom<f64> for SectorSpec {
    type Error = crate::Error;
    fn try_from(nu: f64) -> Result<Self> {
        SectorSpec::new(nu)
    }
}

impl From<SectorSpec> for f64 {
    fn from(s: SectorSpec) -> f64 {
        s.nu
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum PRepr {
    Finite(f64),
    Infinite,
}

/// The integrability exponent `p ∈ (1, ∞]`.
///
/// `p = ∞` is an explicit state, never a large finite sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PExponent(PRepr);

impl PExponent {
    pub const INFINITY: PExponent = PExponent(PRepr::Infinite);

    pub fn finite(p: f64) -> Result<Self> {
        if !p.is_finite() || p <= 1.0 {
            return Err(domain("p must be > 1"));
        }
        Ok(PExponent(PRepr::Finite(p)))
    }

    /// Parses `"inf"`, `"infinity"`, `"∞"` or a finite number.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "inf" | "infinity" | "∞" | "+inf" => Ok(PExponent::INFINITY),
            _ => {
                let p: f64 = t.parse().map_err(|_| domain(format!("cannot parse p from `{s}`")))?;
                PExponent::finite(p)
            }
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self.0, PRepr::Infinite)
    }

    /// The finite value, if any.
    pub fn value(&self) -> Option<f64> {
        match self.0 {
            PRepr::Finite(p) => Some(p),
            PRepr::Infinite => None,
        }
    }

    /// `f64::INFINITY` for the infinite exponent; used only for display and
    /// sorting, never inside formulas.
    pub fn as_f64(&self) -> f64 {
        self.value().unwrap_or(f64::INFINITY)
    }

    /// `a = (p−1)/(p−2)`, with `a = 1` at `p = ∞`. Undefined at `p = 2`.
    pub fn a(&self) -> Option<f64> {
        match self.0 {
            PRepr::Infinite => Some(1.0),
            PRepr::Finite(2.0) => None,
            PRepr::Finite(p) => Some((p - 1.0) / (p - 2.0)),
        }
    }

    /// `b = 1/(p−2)`, defined for finite `p ≠ 2`.
    pub fn b(&self) -> Option<f64> {
        match self.0 {
            PRepr::Finite(p) if p != 2.0 => Some(1.0 / (p - 2.0)),
            _ => None,
        }
    }

    /// The Hölder conjugate `p/(p−1)`; `∞` maps to `1`, which is not a valid
    /// exponent, so it is rejected.
    pub fn conjugate(&self) -> Result<PExponent> {
        match self.0 {
            PRepr::Finite(p) => PExponent::finite(p / (p - 1.0)),
            PRepr::Infinite => Err(domain("p = inf has no admissible conjugate")),
        }
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            PRepr::Finite(p) => write!(f, "{p}"),
            PRepr::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for PExponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            PRepr::Finite(p) => s.serialize_f64(p),
            PRepr::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PExponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(p) => PExponent::finite(p),
            Raw::Text(s) => PExponent::parse(&s),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// Which root of the exponent condition a value belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    K1,
    K2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialExponent {
    pub k: f64,
    pub branch: Branch,
}

/// `√((1−2ν)(p−2)² + ν²p²)`, which also equals `√((ν−1)²p² + 4(2ν−1)(p−1))`.
fn discriminant_root(nu: f64, p: f64) -> f64 {
    ((nu - 1.0).powi(2) * p * p + 4.0 * (2.0 * nu - 1.0) * (p - 1.0)).sqrt()
}

/// `k(ν,∞)`.
fn k_infinity(nu: f64) -> f64 {
    if nu <= 1.0 {
        1.0
    } else {
        nu * nu / (2.0 * nu - 1.0)
    }
}

/// `k₁` for finite `p`, evaluated in the rationalized form
/// `2ν²(p−1) / ((2−p)(1−2ν) + ν²p − (ν−1)S)`, which is algebraically equal to
/// the closed form but carries no `(2ν−1)` denominator.
fn k1_rationalized(nu: f64, p: f64) -> f64 {
    let s = discriminant_root(nu, p);
    let denom = (2.0 - p) * (1.0 - 2.0 * nu) + nu * nu * p - (nu - 1.0) * s;
    2.0 * nu * nu * (p - 1.0) / denom
}

/// The radial exponent `k(ν, p)` (branch `k₁`).
pub fn radial_exponent(sector: SectorSpec, p: PExponent) -> RadialExponent {
    let nu = sector.nu();
    let k = match p.value() {
        None => k_infinity(nu),
        Some(2.0) => nu,
        Some(p) if sector.at_half_plane_limit() => (p - 1.0) / p,
        Some(p) => k1_rationalized(nu, p),
    };
    RadialExponent { k, branch: Branch::K1 }
}

/// Convenience wrapper taking raw values.
pub fn k_of(nu: f64, p: PExponent) -> Result<f64> {
    Ok(radial_exponent(SectorSpec::new(nu)?, p).k)
}

/// Both roots `(k₁, k₂)` of the exponent condition, in their closed forms.
///
/// Exposed for testing the branch selection; everything else uses `k₁`.
pub fn radial_exponent_roots(sector: SectorSpec, p: PExponent) -> Result<(f64, f64)> {
    let p = p.value().ok_or_else(|| domain("roots are defined for finite p only"))?;
    if p == 2.0 {
        return Err(domain("roots are defined for p != 2"));
    }
    let nu = sector.nu();
    if sector.at_half_plane_limit() {
        return Err(domain("roots require nu > 0.5; use radial_exponent for the limit"));
    }
    let s = discriminant_root(nu, p);
    let den = 2.0 * (p - 1.0) * (2.0 * nu - 1.0);
    let k1 = ((nu - 1.0) * s + (2.0 - p) * (1.0 - 2.0 * nu) + nu * nu * p) / den;
    let k2 = ((1.0 - nu) * s + (2.0 - p) * (2.0 * nu - 1.0) + nu * nu * p) / den;
    Ok((k1, k2))
}

/// `π/ν − π(1 − (1 − 1/k)·√(ak)/√(ak−1))`, which vanishes exactly when the
/// angle map sends `±π/2` to the sector sides `±π/(2ν)`.
///
/// For `1 < p < 2` the condition is checked on the conjugate exponent
/// `p' = p/(p−1) > 2` with `k' = (k−1)/(p'−1) + 1`, the inverse of the stream
/// relation `k = (p'−1)(k'−1) + 1`.
pub fn exponent_condition_residual(k: f64, sector: SectorSpec, p: PExponent) -> Result<f64> {
    let (k, p) = match p.value() {
        Some(2.0) => return Err(domain("the exponent condition is undefined at p = 2")),
        Some(v) if v < 2.0 => {
            let conj = p.conjugate()?;
            let pc = conj.value().expect("finite conjugate");
            ((k - 1.0) / (pc - 1.0) + 1.0, conj)
        }
        _ => (k, p),
    };
    let a = p.a().expect("a is defined away from p = 2");
    let ak = a * k;
    if !(ak > 1.0) {
        return Err(domain(format!("exponent condition requires a*k > 1 (got {ak})")));
    }
    let nu = sector.nu();
    Ok(PI / nu - PI * (1.0 - (1.0 - 1.0 / k) * (ak / (ak - 1.0)).sqrt()))
}

/// `∂k/∂ν`.
///
/// Finite `p` uses the closed-form derivative of `k₁`; `p = ∞` differentiates
/// the piecewise limit (both one-sided derivatives vanish at `ν = 1`).
pub fn dk_dnu(sector: SectorSpec, p: PExponent) -> Result<f64> {
    if sector.at_half_plane_limit() {
        return Err(domain("dk/dnu is undefined at nu = 0.5; probe nu = 0.5 + eps"));
    }
    let nu = sector.nu();
    let Some(p) = p.value() else {
        return Ok(if nu <= 1.0 {
            0.0
        } else {
            2.0 * nu * (nu - 1.0) / (2.0 * nu - 1.0).powi(2)
        });
    };
    let t = discriminant_root(nu, p);
    let e = 2.0 * nu - 1.0;
    let num = p * (nu - 1.0) * t + (nu - 1.0).powi(2) * p * p + 2.0 * e * (p - 1.0);
    Ok(nu * num / ((p - 1.0) * e * e * t))
}

/// `∂k/∂p` for finite `p`. At `ν = 1/2` this returns the limit `1/p²`.
pub fn dk_dp(sector: SectorSpec, p: PExponent) -> Result<f64> {
    let p = p.value().ok_or_else(|| domain("dk/dp is defined for finite p only"))?;
    if sector.at_half_plane_limit() {
        return Ok(1.0 / (p * p));
    }
    let nu = sector.nu();
    let t = discriminant_root(nu, p);
    let e = 2.0 * nu - 1.0;
    let num = (nu - 1.0) * t + nu * nu * p + e * (p - 2.0);
    Ok((1.0 - nu) * num / (2.0 * e * (p - 1.0).powi(2) * t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sec(nu: f64) -> SectorSpec {
        SectorSpec::new(nu).unwrap()
    }
    fn pf(p: f64) -> PExponent {
        PExponent::finite(p).unwrap()
    }

    /// Independent oracle: bisection on the exponent condition over `a·k > 1`.
    fn bisect_k(nu: f64, p: f64) -> f64 {
        let a = (p - 1.0) / (p - 2.0);
        let cond = |k: f64| {
            let ak = a * k;
            PI / nu - PI * (1.0 - (1.0 - 1.0 / k) * (ak / (ak - 1.0)).sqrt())
        };
        let (mut lo, mut hi) = (1.0 / a * (1.0 + 1e-15), 50.0);
        let flo = cond(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (cond(mid) > 0.0) == (flo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn domain_checks() {
        assert_eq!(SectorSpec::new(0.4).unwrap_err().to_string(), "nu must be >= 0.5");
        assert!(PExponent::finite(1.0).is_err());
        assert!(PExponent::finite(f64::NAN).is_err());
        assert!(PExponent::parse("inf").unwrap().is_infinite());
        assert_eq!(PExponent::parse("3").unwrap().value(), Some(3.0));
    }

    #[test]
    fn stated_values() {
        assert_eq!(radial_exponent(sec(1.0), pf(2.0)).k, 1.0);
        assert!((radial_exponent(sec(2.0), PExponent::INFINITY).k - 4.0 / 3.0).abs() < 1e-15);
        assert!((radial_exponent(sec(0.5), pf(3.0)).k - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn matches_bisection_oracle() {
        // 40-digit reference from bisection on the exponent condition.
        const K_2_3: f64 = 1.728_713_553_878_169;
        let k = radial_exponent(sec(2.0), pf(3.0)).k;
        assert!((k - K_2_3).abs() < 1e-13, "{k}");
        assert!((bisect_k(2.0, 3.0) - K_2_3).abs() < 1e-12);
        for &(nu, p) in &[(0.6, 2.5), (0.75, 3.0), (1.5, 10.0), (3.0, 2.2), (4.0, 100.0)] {
            let k = radial_exponent(sec(nu), pf(p)).k;
            let o = bisect_k(nu, p);
            assert!((k - o).abs() < 1e-10 * o, "nu={nu} p={p} {k} vs {o}");
        }
    }

    #[test]
    fn roots_near_p2_and_at_p4() {
        let (k1, k2) = radial_exponent_roots(sec(2.0), pf(2.0 + 1e-7)).unwrap();
        assert!((k1 - 2.0).abs() < 1e-6 && (k2 - 2.0 / 3.0).abs() < 1e-6);
        let (k1, k2) = radial_exponent_roots(sec(0.75), pf(2.0 + 1e-7)).unwrap();
        assert!((k1 - 0.75).abs() < 1e-6 && (k2 - 1.5).abs() < 1e-6);
        // Both roots at (2, 4), from the closed forms evaluated at 40 digits.
        let (k1, k2) = radial_exponent_roots(sec(2.0), pf(4.0)).unwrap();
        assert!((k1 - 1.622_839_030_607_109_9).abs() < 1e-13);
        assert!((k2 - 0.154_938_747_170_667_86).abs() < 1e-13);
        assert!((k1 - radial_exponent(sec(2.0), pf(4.0)).k).abs() < 1e-13);
        assert!((k1 - bisect_k(2.0, 4.0)).abs() < 1e-12);
        assert!(radial_exponent_roots(sec(0.5), pf(3.0)).is_err());
        assert!(radial_exponent_roots(sec(2.0), pf(2.0)).is_err());
    }

    #[test]
    fn condition_residual_examples() {
        let k = radial_exponent(sec(2.0), pf(3.0)).k;
        assert!(exponent_condition_residual(k, sec(2.0), pf(3.0)).unwrap().abs() < 1e-10);
        assert!(
            exponent_condition_residual(1.5, sec(1.5), pf(2.0 + 1e-9))
                .unwrap()
                .abs()
                < 1e-6
        );
        assert!(exponent_condition_residual(1.1 * k, sec(2.0), pf(3.0)).unwrap().abs() > 1e-3);
        assert!(exponent_condition_residual(0.1, sec(2.0), pf(3.0)).is_err());
        // conjugate route for p < 2
        let kq = radial_exponent(sec(2.0), pf(1.5)).k;
        assert!(exponent_condition_residual(kq, sec(2.0), pf(1.5)).unwrap().abs() < 1e-10);
    }

    #[test]
    fn derivative_examples() {
        assert!((dk_dnu(sec(1.0), pf(2.0)).unwrap() - 1.0).abs() < 1e-14);
        assert!((dk_dnu(sec(1.2), PExponent::INFINITY).unwrap() - 0.48 / 1.96).abs() < 1e-14);
        assert!(dk_dnu(sec(0.5), pf(3.0)).is_err());
        assert_eq!(dk_dp(sec(1.0), pf(3.0)).unwrap(), 0.0);
        assert!(dk_dp(sec(0.75), pf(3.0)).unwrap() > 0.0);
        assert!((dk_dp(sec(0.5), pf(4.0)).unwrap() - 1.0 / 16.0).abs() < 1e-15);
        // 40-digit finite differences of the closed form.
        assert!((dk_dp(sec(2.0), pf(3.0)).unwrap() + 0.150_465_201_638_977_8).abs() < 1e-13);
        assert!((dk_dnu(sec(2.0), pf(3.0)).unwrap() - 0.739_514_530_563_294_9).abs() < 1e-13);
    }

    #[test]
    fn infinity_limit() {
        for nu in [0.5, 1.0, 2.0, 4.0] {
            let a = radial_exponent(sec(nu), pf(1e6)).k;
            let b = radial_exponent(sec(nu), PExponent::INFINITY).k;
            assert!((a - b).abs() <= 1e-4, "nu={nu}: {a} vs {b}");
        }
    }

    #[test]
    fn half_plane_limit_is_continuous() {
        for p in [1.1, 1.5, 3.0, 10.0] {
            let at = radial_exponent(sec(0.5), pf(p)).k;
            let near = radial_exponent(sec(0.5 + 1e-7), pf(p)).k;
            assert!((at - near).abs() < 1e-6);
        }
    }

    proptest! {
        #[test]
        fn k_positive_and_branch_values(nu in 0.5f64..8.0, p in 1.01f64..200.0) {
            let k = radial_exponent(sec(nu), pf(p)).k;
            prop_assert!(k.is_finite() && k > 0.0);
            if p > 2.0 {
                let a = (p - 1.0) / (p - 2.0);
                prop_assert!(a * k > 1.0);
            }
        }

        #[test]
        fn nondecreasing_in_nu(nu in 0.5f64..6.0, dnu in 1e-4f64..1.0, p in 1.05f64..50.0) {
            let k0 = radial_exponent(sec(nu), pf(p)).k;
            let k1 = radial_exponent(sec(nu + dnu), pf(p)).k;
            prop_assert!(k1 >= k0 - 1e-12);
        }
    }
}
