//! Stream-function conjugation `u = r^k f(φ) ↦ v = r^λ g(φ)`.
//!
//! If `u` is p-harmonic with `2 < p < ∞` then `v` with
//! `∇v = |∇u|^{p−2} T∇u` (`T` the rotation by `+π/2`) is q-harmonic,
//! `q = p/(p−1)`, and
//!
//! ```text
//! λ = (p−1)(k−1) + 1,
//! g  = −(1/λ) f′ (k²f² + f′²)^{(p−2)/2},
//! g′ =   k  f  (k²f² + f′²)^{(p−2)/2}.
//! ```

use serde::Serialize;

use crate::error::{domain, Result};
use crate::exponent::{radial_exponent, PExponent};
use crate::profile::angle_map::AngleMap;

/// `(φ, θ, f, f′)` samples of an angle-map profile on an arbitrary grid,
/// possibly extending past the sector side up to `π/ν`.
#[derive(Debug, Clone)]
pub struct ExtendedTable {
    pub map: AngleMap,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub f: Vec<f64>,
    pub fprime: Vec<f64>,
}

impl ExtendedTable {
    pub fn tabulate(map: AngleMap, phi: Vec<f64>, exec: crate::Execution) -> Result<Self> {
        let rows = crate::par::map(exec, &phi, |&x| map.eval(x));
        let mut table = ExtendedTable {
            map,
            theta: Vec::with_capacity(phi.len()),
            f: Vec::with_capacity(phi.len()),
            fprime: Vec::with_capacity(phi.len()),
            phi,
        };
        for row in rows {
            let (t, f, fp) = row?;
            table.theta.push(t);
            table.f.push(f);
            table.fprime.push(fp);
        }
        Ok(table)
    }
}

/// Tabulated conjugate pair `(f, f′) ↔ (g, g′)` on the base grid.
#[derive(Debug, Clone)]
pub struct StreamPair {
    pub map: AngleMap,
    /// The `q ∈ (1, 2)` for which `v` is q-harmonic.
    pub q: f64,
    /// The conjugate `p = q/(q−1) > 2` of the base profile.
    pub p: f64,
    /// Exponent `k(ν, p)` of the base profile.
    pub k: f64,
    /// Stream exponent `λ = (p−1)(k−1) + 1`.
    pub lambda: f64,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub f: Vec<f64>,
    pub fprime: Vec<f64>,
    pub g: Vec<f64>,
    pub gprime: Vec<f64>,
}

/// `(g, g′)` from `(f, f′)` at one angle.
pub fn conjugate_point(f: f64, fp: f64, k: f64, p: f64, lambda: f64) -> (f64, f64) {
    let w = (k * k * f * f + fp * fp).powf(0.5 * (p - 2.0));
    (-fp * w / lambda, k * f * w)
}

/// Builds the q-harmonic stream function of a base profile for `p = q/(q−1)`.
pub fn stream_conjugate(base: &ExtendedTable, q: f64) -> Result<StreamPair> {
    if !(q > 1.0 && q < 2.0) {
        return Err(domain("stream conjugation requires q in (1, 2)"));
    }
    let p = q / (q - 1.0);
    match base.map.p().value() {
        Some(bp) if (bp - p).abs() <= 1e-12 * p => {}
        _ => return Err(domain("base profile must be built for p = q/(q-1)")),
    }
    let k = base.map.k();
    let lambda = (p - 1.0) * (k - 1.0) + 1.0;
    let (g, gprime) = base
        .f
        .iter()
        .zip(&base.fprime)
        .map(|(&f, &fp)| conjugate_point(f, fp, k, p, lambda))
        .unzip();
    Ok(StreamPair {
        map: base.map,
        q,
        p,
        k,
        lambda,
        phi: base.phi.clone(),
        theta: base.theta.clone(),
        f: base.f.clone(),
        fprime: base.fprime.clone(),
        g,
        gprime,
    })
}

/// Pointwise deviations from the conjugation system, each divided by the
/// matching power of `|∇u|` at `r = 1`:
/// `λ²g² + g′² = (k²f² + f′²)^{p−1}`, `λg = −f′(k²f² + f′²)^{(p−2)/2}`,
/// `g′ = k f (k²f² + f′²)^{(p−2)/2}`.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct StreamIdentities {
    pub modulus: f64,
    pub radial: f64,
    pub angular: f64,
}

impl StreamIdentities {
    pub fn max(&self) -> f64 {
        self.modulus.max(self.radial).max(self.angular)
    }
}

impl StreamPair {
    pub fn identities_at(&self, i: usize) -> StreamIdentities {
        let (f, fp, g, gp) = (self.f[i], self.fprime[i], self.g[i], self.gprime[i]);
        let grad2 = self.k * self.k * f * f + fp * fp;
        let pow_m1 = grad2.powf(0.5 * (self.p - 1.0));
        let w = grad2.powf(0.5 * (self.p - 2.0));
        StreamIdentities {
            modulus: (self.lambda * self.lambda * g * g + gp * gp - pow_m1 * pow_m1).abs() / (pow_m1 * pow_m1),
            radial: (self.lambda * g + fp * w).abs() / pow_m1,
            angular: (gp - self.k * f * w).abs() / pow_m1,
        }
    }

    /// `κ = 1 − 1/D` with `D = (q−1)k(ν,q)/(2−q) + 1`, the lower end of the
    /// window `κ ≤ 1 − cos²θ/D ≤ 1`.
    pub fn kappa(&self) -> f64 {
        1.0 - 1.0 / self.kappa_denominator()
    }

    pub fn kappa_denominator(&self) -> f64 {
        (self.q - 1.0) * self.lambda / (2.0 - self.q) + 1.0
    }

    /// Cartesian gradients `(∇u, ∇v)` at the polar point `(r, φ_i)`.
    pub fn gradients_at(&self, i: usize, r: f64) -> ([f64; 2], [f64; 2]) {
        let (s, c) = self.phi[i].sin_cos();
        let e = [c, s];
        let d = [-s, c];
        let su = r.powf(self.k - 1.0);
        let sv = r.powf(self.lambda - 1.0);
        let (a_u, b_u) = (self.k * self.f[i], self.fprime[i]);
        let (a_v, b_v) = (self.lambda * self.g[i], self.gprime[i]);
        (
            [su * (a_u * e[0] + b_u * d[0]), su * (a_u * e[1] + b_u * d[1])],
            [sv * (a_v * e[0] + b_v * d[0]), sv * (a_v * e[1] + b_v * d[1])],
        )
    }

    /// Checks that the stream exponent equals `k(ν, q)`.
    pub fn exponent_gap(&self) -> f64 {
        let q = PExponent::finite(self.q).expect("q > 1");
        (self.lambda - radial_exponent(self.map.sector(), q).k).abs()
    }

    /// `g(φ)` evaluated from the exact base profile rather than the table.
    pub fn g_exact(&self, phi: f64) -> Result<(f64, f64)> {
        let (_, f, fp) = self.map.eval(phi)?;
        Ok(conjugate_point(f, fp, self.k, self.p, self.lambda))
    }
}
