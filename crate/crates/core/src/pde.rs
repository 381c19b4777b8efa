//! Residual checks for the polar p-Laplace equation, the separation ODE and
//! the ∞-Laplace equation.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::exponent::PExponent;
use crate::par::{self, Execution};
use crate::profile::{AngularProfile, CaseTag, PolarPoint};

/// Half-width of the excluded band around non-`C²` angles.
pub const BAND_EPS: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub max_abs_residual: f64,
    pub sample_count: usize,
    pub excluded_bands: Vec<(f64, f64)>,
    /// Largest term magnitude seen; residuals are divided pointwise by the
    /// local term maximum.
    pub normalization_scale: f64,
}

impl ResidualReport {
    fn from_samples(samples: &[(f64, f64)], excluded_bands: Vec<(f64, f64)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(domain("no samples outside the excluded bands"));
        }
        let rel = |&(res, scale): &(f64, f64)| if scale > 0.0 { res.abs() / scale } else { res.abs() };
        Ok(ResidualReport {
            max_abs_residual: samples.iter().map(rel).fold(0.0, f64::max),
            sample_count: samples.len(),
            excluded_bands,
            normalization_scale: samples.iter().map(|s| s.1).fold(0.0, f64::max),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Raw residual and the largest individual term at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Terms {
    pub residual: f64,
    pub term_max: f64,
}

impl Terms {
    pub fn relative(&self) -> f64 {
        if self.term_max > 0.0 {
            self.residual.abs() / self.term_max
        } else {
            self.residual.abs()
        }
    }
}

fn finite_b(p: PExponent) -> Result<f64> {
    match p.value() {
        Some(v) if v != 2.0 => Ok(1.0 / (v - 2.0)),
        Some(_) => Err(domain("the multiplied polar form needs p != 2")),
        None => Err(domain("finite p required")),
    }
}

/// Terms of the polar p-Laplace equation multiplied through by `2ψ`, with
/// partials by second-order central differences on a 3×3 polar stencil.
pub fn polar_plap_terms<F>(field: F, point: PolarPoint, p: PExponent, step: f64, half_aperture: f64) -> Result<Terms>
where
    F: Fn(PolarPoint) -> Result<f64>,
{
    let b = finite_b(p)?;
    let (r, phi, h) = (point.r, point.phi, step);
    if !(h > 0.0) || r <= 2.0 * h {
        return Err(domain("stencil needs step > 0 and r > 2*step"));
    }
    if phi.abs() + h > half_aperture {
        return Err(domain("stencil exits the sector"));
    }
    let u = |dr: f64, dp: f64| {
        field(PolarPoint {
            r: r + dr * h,
            phi: phi + dp * h,
        })
    };
    let c = u(0.0, 0.0)?;
    let (e, w, n, s) = (u(1.0, 0.0)?, u(-1.0, 0.0)?, u(0.0, 1.0)?, u(0.0, -1.0)?);
    let (ne, nw, se, sw) = (u(1.0, 1.0)?, u(-1.0, 1.0)?, u(1.0, -1.0)?, u(-1.0, -1.0)?);
    let ur = (e - w) / (2.0 * h);
    let up = (n - s) / (2.0 * h);
    let urr = (e - 2.0 * c + w) / (h * h);
    let upp = (n - 2.0 * c + s) / (h * h);
    let urp = (ne - nw - se + sw) / (4.0 * h * h);
    Ok(polar_plap_from_partials(b, r, ur, up, urr, upp, urp))
}

/// The same terms from given partial derivatives.
pub fn polar_plap_from_partials(b: f64, r: f64, ur: f64, up: f64, urr: f64, upp: f64, urp: f64) -> Terms {
    let (r2, r3, r4) = (r * r, r * r * r, r * r * r * r);
    let t = [
        (b + 1.0) * ur * ur * urr,
        b / r2 * urr * up * up,
        b / r2 * ur * ur * upp,
        (b + 1.0) / r4 * up * up * upp,
        b / r * ur * ur * ur,
        (b - 1.0) / r3 * ur * up * up,
        2.0 / r2 * ur * up * urp,
    ];
    Terms {
        residual: t.iter().sum(),
        term_max: t.iter().fold(0.0, |m, x| m.max(x.abs())),
    }
}

/// Relative polar p-Laplace residual (raw residual over the largest term).
pub fn polar_plap_residual<F>(field: F, point: PolarPoint, p: PExponent, step: f64, half_aperture: f64) -> Result<f64>
where
    F: Fn(PolarPoint) -> Result<f64>,
{
    Ok(polar_plap_terms(field, point, p, step, half_aperture)?.relative())
}

fn separation_terms(f: f64, fp: f64, fpp: f64, k: f64, b: f64) -> [f64; 3] {
    [
        ((b + 1.0) * fp * fp + b * k * k * f * f) * fpp,
        (2.0 * k + b * k - 1.0) * k * f * fp * fp,
        (b * k + k - 1.0) * k.powi(3) * f.powi(3),
    ]
}

fn inf_separation_terms(f: f64, fp: f64, fpp: f64, k: f64) -> [f64; 3] {
    [
        fp * fp * fpp,
        (2.0 * k - 1.0) * k * f * fp * fp,
        (k - 1.0) * k.powi(3) * f.powi(3),
    ]
}

fn terms_of(t: [f64; 3]) -> Terms {
    Terms {
        residual: t.iter().sum(),
        term_max: t.iter().fold(0.0, |m, x| m.max(x.abs())),
    }
}

/// `[(b+1)f′² + bk²f²] f″ + (2k+bk−1) k f f′² + (bk+k−1) k³ f³`.
pub fn separation_residual(f: f64, fprime: f64, fsecond: f64, k: f64, p: PExponent) -> Result<f64> {
    let b = finite_b(p)?;
    Ok(separation_terms(f, fprime, fsecond, k, b).iter().sum())
}

/// `f′² f″ + (2k−1) k f f′² + (k−1) k³ f³`.
pub fn inf_separation_residual(f: f64, fprime: f64, fsecond: f64, k: f64) -> f64 {
    inf_separation_terms(f, fprime, fsecond, k).iter().sum()
}

/// Raw `Σ u_i u_j u_ij` and the scale `|∇u|² max(‖D²u‖, |∇u|/|x|)`.
pub fn inf_lap_terms<F>(field: F, x: [f64; 2], step: f64) -> Result<Terms>
where
    F: Fn([f64; 2]) -> Result<f64>,
{
    let h = step;
    if !(h > 0.0) {
        return Err(domain("step must be > 0"));
    }
    let u = |dx: f64, dy: f64| field([x[0] + dx * h, x[1] + dy * h]);
    let c = u(0.0, 0.0)?;
    let (e, w, n, s) = (u(1.0, 0.0)?, u(-1.0, 0.0)?, u(0.0, 1.0)?, u(0.0, -1.0)?);
    let (ne, nw, se, sw) = (u(1.0, 1.0)?, u(-1.0, 1.0)?, u(1.0, -1.0)?, u(-1.0, -1.0)?);
    let ux = (e - w) / (2.0 * h);
    let uy = (n - s) / (2.0 * h);
    let uxx = (e - 2.0 * c + w) / (h * h);
    let uyy = (n - 2.0 * c + s) / (h * h);
    let uxy = (ne - nw - se + sw) / (4.0 * h * h);
    let residual = ux * ux * uxx + 2.0 * ux * uy * uxy + uy * uy * uyy;
    let g2 = ux * ux + uy * uy;
    let hess = (uxx * uxx + 2.0 * uxy * uxy + uyy * uyy).sqrt();
    let rad = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let curv = if rad > 0.0 { g2.sqrt() / rad } else { 0.0 };
    Ok(Terms {
        residual,
        term_max: g2 * hess.max(curv),
    })
}

/// `Σ u_i u_j u_ij` at `x`; errors inside `|φ| < ridge_band`.
pub fn inf_lap_residual<F>(field: F, x: [f64; 2], step: f64, ridge_band: f64) -> Result<f64>
where
    F: Fn([f64; 2]) -> Result<f64>,
{
    if x[1].atan2(x[0]).abs() < ridge_band {
        return Err(domain("point inside the excluded ridge band"));
    }
    Ok(inf_lap_terms(field, x, step)?.residual)
}

fn excluded(profile: &AngularProfile, band: f64) -> Vec<(f64, f64)> {
    profile
        .singular_angles()
        .into_iter()
        .map(|a| (a - band, a + band))
        .collect()
}

fn in_bands(phi: f64, bands: &[(f64, f64)]) -> bool {
    bands.iter().any(|&(lo, hi)| phi > lo && phi < hi)
}

/// Interior sample angles `φ_j`, `j = 1..=n`, evenly spaced strictly inside
/// the sector and kept `margin` away from the sides.
pub fn interior_angles(profile: &AngularProfile, n: usize, margin: f64) -> Vec<f64> {
    let half = profile.sector.half_aperture() - margin;
    (1..=n)
        .map(|j| -half + 2.0 * half * j as f64 / (n + 1) as f64)
        .collect()
}

/// Separation ODE residual on the interior table rows, with `f″` from second
/// central differences of the exact profile (step `fd_step`).
pub fn profile_separation_report(profile: &AngularProfile, fd_step: f64, exec: Execution) -> Result<ResidualReport> {
    let bands = excluded(profile, BAND_EPS);
    let half = profile.sector.half_aperture();
    let rows: Vec<usize> = (1..profile.len() - 1)
        .filter(|&i| {
            let x = profile.phi[i];
            !in_bands(x, &bands) && x.abs() + fd_step < half
        })
        .collect();
    let b = profile.p.value().map(|v| 1.0 / (v - 2.0));
    if profile.case == CaseTag::P2Closed {
        return Err(domain("the separation ODE is written for p != 2"));
    }
    let k = profile.k;
    let samples = par::map(exec, &rows, |&i| -> Result<(f64, f64)> {
        let x = profile.phi[i];
        let (f, fp) = (profile.f[i], profile.fprime[i]);
        let fm = profile.exact(x - fd_step)?.1;
        let fpl = profile.exact(x + fd_step)?.1;
        let fpp = (fpl - 2.0 * f + fm) / (fd_step * fd_step);
        let t = match b {
            Some(b) => terms_of(separation_terms(f, fp, fpp, k, b)),
            None => terms_of(inf_separation_terms(f, fp, fpp, k)),
        };
        Ok((t.residual, t.term_max))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    ResidualReport::from_samples(&samples, bands)
}

/// Polar p-Laplace residual of `u = r^k f(φ)` (exact profile) at `n` interior
/// angles on the circle of radius `r`.
pub fn profile_plap_report(
    profile: &AngularProfile,
    r: f64,
    n: usize,
    step: f64,
    exec: Execution,
) -> Result<ResidualReport> {
    if profile.p.is_infinite() {
        return Err(domain("use profile_inf_lap_report for p = inf"));
    }
    let angles = interior_angles(profile, n, 2.0 * step);
    let half = profile.sector.half_aperture();
    let field = |q: PolarPoint| profile.u_exact(q.r, q.phi);
    let samples = par::map(exec, &angles, |&phi| -> Result<(f64, f64)> {
        let t = polar_plap_terms(field, PolarPoint { r, phi }, profile.p, step, half)?;
        Ok((t.residual, t.term_max))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    ResidualReport::from_samples(&samples, Vec::new())
}

/// ∞-Laplace residual of `u = r^k f(φ)` at `n` interior angles on radius `r`,
/// skipping the bands around non-`C²` angles.
pub fn profile_inf_lap_report(
    profile: &AngularProfile,
    r: f64,
    n: usize,
    step: f64,
    exec: Execution,
) -> Result<ResidualReport> {
    if !profile.p.is_infinite() {
        return Err(domain("the inf-Laplace report needs p = inf"));
    }
    let bands = excluded(profile, BAND_EPS);
    let angles: Vec<f64> = interior_angles(profile, n, 2.0 * step / r)
        .into_iter()
        .filter(|&x| !in_bands(x, &bands))
        .collect();
    let half = profile.sector.half_aperture();
    let field = |x: [f64; 2]| {
        let rr = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let phi = x[1].atan2(x[0]);
        if phi.abs() > half {
            return Err(domain("stencil exits the sector"));
        }
        profile.u_exact(rr, phi)
    };
    let samples = par::map(exec, &angles, |&phi| -> Result<(f64, f64)> {
        let t = inf_lap_terms(field, [r * phi.cos(), r * phi.sin()], step)?;
        Ok((t.residual, t.term_max))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    ResidualReport::from_samples(&samples, bands)
}

/// Ratio of maximum residuals at `step` and `step/2`; about 4 for a
/// second-order discretization error.
/// Base step for the halving check, shrunk with the aperture so that narrow
/// sectors are probed in the asymptotic regime.
pub fn halving_step(profile: &AngularProfile) -> f64 {
    1e-2 * profile.nu().recip().min(1.0)
}

pub fn step_halving_ratio(profile: &AngularProfile, r: f64, n: usize, step: f64, exec: Execution) -> Result<f64> {
    let coarse = profile_plap_report(profile, r, n, step, exec)?;
    let fine = profile_plap_report(profile, r, n, step / 2.0, exec)?;
    Ok(coarse.max_abs_residual / fine.max_abs_residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::SectorSpec;
    use crate::profile::build_profile;
    use std::f64::consts::PI;

    fn pf(p: f64) -> PExponent {
        PExponent::finite(p).unwrap()
    }
    fn prof(nu: f64, p: PExponent) -> AngularProfile {
        build_profile(SectorSpec::new(nu).unwrap(), p, 128).unwrap()
    }

    #[test]
    fn constant_and_affine_fields() {
        let pt = PolarPoint::new(1.0, 0.2).unwrap();
        assert_eq!(
            polar_plap_terms(|_| Ok(3.0), pt, pf(3.0), 1e-3, 1.0).unwrap().residual,
            0.0
        );
        let r = inf_lap_residual(|x| Ok(2.0 * x[0] - x[1] + 1.0), [0.3, 0.4], 1e-3, 0.0).unwrap();
        assert!(r.abs() < 1e-6);
        assert!(inf_lap_residual(|x| Ok(x[0]), [1.0, 1e-4], 1e-3, BAND_EPS).is_err());
    }

    #[test]
    fn cone_is_infinity_harmonic() {
        let x0 = [0.3, -0.2];
        let cone = |x: [f64; 2]| Ok(((x[0] - x0[0]).powi(2) + (x[1] - x0[1]).powi(2)).sqrt());
        let t = inf_lap_terms(cone, [1.0, 0.5], 1e-3).unwrap();
        assert!(t.relative() < 1e-6, "{t:?}");
    }

    #[test]
    fn harmonic_laplace_form() {
        let nu = 2.0;
        let u = |r: f64, phi: f64| r.powf(nu) * (nu * phi).cos();
        let (r, phi, h) = (0.8, 0.3, 1e-3);
        let urr = (u(r + h, phi) - 2.0 * u(r, phi) + u(r - h, phi)) / (h * h);
        let ur = (u(r + h, phi) - u(r - h, phi)) / (2.0 * h);
        let upp = (u(r, phi + h) - 2.0 * u(r, phi) + u(r, phi - h)) / (h * h);
        assert!((urr + ur / r + upp / (r * r)).abs() < 1e-5);
    }

    #[test]
    fn separation_trivial_and_harmonic_limit() {
        assert_eq!(separation_residual(0.0, 0.0, 0.0, 1.3, pf(3.0)).unwrap(), 0.0);
        assert_eq!(inf_separation_residual(0.0, 0.0, 0.0, 1.3), 0.0);
        // p → 2: residual/b → k²f² f″ + ... reduces to f″ + ν²f = 0
        let (nu, phi) = (1.5f64, 0.4f64);
        let (f, fp, fpp) = ((nu * phi).cos(), -nu * (nu * phi).sin(), -nu * nu * (nu * phi).cos());
        let p = pf(2.0 + 1e-7);
        let b = 1e7;
        let r = separation_residual(f, fp, fpp, nu, p).unwrap() / b;
        assert!(r.abs() < 1e-5, "{r}");
    }

    #[test]
    fn built_profiles_satisfy_the_ode() {
        let rep = profile_separation_report(&prof(1.0, pf(4.0)), 1e-4, Execution::Sequential).unwrap();
        assert!(rep.max_abs_residual < 1e-4, "{rep:?}");
        let rep = profile_separation_report(&prof(2.0, PExponent::INFINITY), 1e-4, Execution::Sequential).unwrap();
        assert!(rep.max_abs_residual < 1e-4, "{rep:?}");
        assert_eq!(rep.excluded_bands, vec![(-BAND_EPS, BAND_EPS)]);
    }

    #[test]
    fn plap_residual_of_constructed_solution() {
        let pr = prof(2.0, pf(3.0));
        let field = |q: PolarPoint| pr.u_exact(q.r, q.phi);
        let t = polar_plap_terms(field, PolarPoint::new(1.0, 0.2).unwrap(), pf(3.0), 1e-3, PI / 4.0).unwrap();
        assert!(t.relative() < 1e-4, "{t:?}");
        assert!(polar_plap_terms(field, PolarPoint::new(1.0, 0.785).unwrap(), pf(3.0), 1e-3, PI / 4.0).is_err());
    }

    #[test]
    fn inf_lap_of_half_plane_profile() {
        let pr = prof(1.0, PExponent::INFINITY);
        let rep = profile_inf_lap_report(&pr, 1.0, 50, 1e-3, Execution::Sequential).unwrap();
        assert!(rep.max_abs_residual < 1e-3, "{rep:?}");
    }

    #[test]
    fn report_serializes() {
        let rep = profile_separation_report(&prof(2.0, pf(3.0)), 1e-4, Execution::Sequential).unwrap();
        let v: serde_json::Value = serde_json::from_str(&rep.to_json().unwrap()).unwrap();
        assert!(v["sample_count"].as_u64().unwrap() > 100);
    }
}
