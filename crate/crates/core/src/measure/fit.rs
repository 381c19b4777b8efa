//! Power-law fits and comparability ratios of a solved measure.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::measure::solver::MeasureSolution;

/// Default fit window as fractions of `R`.
pub const FIT_WINDOW: (f64, f64) = (0.05, 0.4);
/// Rings kept away from the apex ring, as a multiple of `r_min`.
pub const APEX_MARGIN: f64 = 10.0;
/// Grid cells dropped next to every boundary of the comparison region.
pub const CELL_MARGIN: usize = 2;
/// Nodes where `(|x|/R)^k` falls below this are skipped: the measure there is
/// smaller than the solver can resolve against data of size 1.
pub const RESOLVABLE_POWER: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub exponent: f64,
    pub intercept: f64,
    pub rms: f64,
    pub r_window: (f64, f64),
    pub ray_angle: f64,
    pub points: usize,
}

/// Least-squares line through `(ln x, ln y)`.
pub fn fit_log_log(samples: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if samples.len() < 2 {
        return Err(domain("need at least 2 points"));
    }
    if samples.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        return Err(domain("log-log fit needs positive samples"));
    }
    let n = samples.len() as f64;
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(domain("degenerate abscissae"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum::<f64>() / n).sqrt();
    Ok((slope, intercept, rms))
}

/// Slope of `ln ω` against `ln r` on the rings with `r ∈ [r_lo, r_hi]` along
/// the ray at `ray_angle`.
pub fn fit_slope(solution: &MeasureSolution, ray_angle: f64, r_window: (f64, f64)) -> Result<SlopeFit> {
    let (lo, hi) = r_window;
    let big_r = solution.problem.radius;
    if !(lo > 0.0 && lo < hi && hi < big_r) {
        return Err(domain("fit window must satisfy 0 < r_lo < r_hi < R"));
    }
    if ray_angle.abs() >= solution.problem.half_aperture() {
        return Err(domain("ray must lie inside the sector"));
    }
    let samples: Vec<(f64, f64)> = solution
        .along_ray(ray_angle)
        .into_iter()
        .filter(|&(r, _)| r >= lo && r <= hi)
        .collect();
    if samples.len() < 8 {
        return Err(domain(format!("fit window holds {} radii, need >= 8", samples.len())));
    }
    let (exponent, intercept, rms) = fit_log_log(&samples)?;
    Ok(SlopeFit {
        exponent,
        intercept,
        rms,
        r_window,
        ray_angle,
        points: samples.len(),
    })
}

/// Fit on the default window along `φ = 0`.
pub fn fit_default(solution: &MeasureSolution) -> Result<SlopeFit> {
    let big_r = solution.problem.radius;
    fit_slope(solution, 0.0, (FIT_WINDOW.0 * big_r, FIT_WINDOW.1 * big_r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// `|φ| < π/(4ν)`, the sector of half the aperture.
    S2Nu,
    /// The whole sector.
    SNu,
}

/// `min` and `max` of `ω(x)/(|x|/R)^k` over grid nodes of the region with
/// `|x| ≤ r_max`, dropping `CELL_MARGIN` cells at the arc and the sides and
/// the rings below `APEX_MARGIN·r_min` or where `(|x|/R)^k < RESOLVABLE_POWER`.
pub fn comparability_within(solution: &MeasureSolution, k: f64, region: Region, r_max: f64) -> Result<(f64, f64)> {
    if !(k > 0.0) {
        return Err(domain("k must be > 0"));
    }
    let pr = &solution.problem;
    let (n_r, n_phi) = (pr.n_r, pr.n_phi);
    let limit = match region {
        Region::S2Nu => pr.half_aperture() / 2.0,
        Region::SNu => pr.half_aperture(),
    };
    let r_floor = APEX_MARGIN * solution.r[0];
    let (mut lo, mut hi) = (f64::INFINITY, 0f64);
    for i in CELL_MARGIN..=n_r.saturating_sub(CELL_MARGIN) {
        let r = solution.r[i];
        if r < r_floor || r > r_max || (r / pr.radius).powf(k) < RESOLVABLE_POWER {
            continue;
        }
        for j in CELL_MARGIN..=n_phi - CELL_MARGIN {
            if solution.phi[j].abs() > limit + 1e-12 {
                continue;
            }
            let ratio = solution.at(i, j) / (r / pr.radius).powf(k);
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
    }
    if !lo.is_finite() {
        return Err(domain("comparison region holds no grid nodes"));
    }
    Ok((lo, hi))
}

pub fn comparability_constants(solution: &MeasureSolution, k: f64, region: Region) -> Result<(f64, f64)> {
    comparability_within(solution, k, region, solution.problem.radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::problem::MeasureProblem;

    fn planted(kappa: f64) -> MeasureSolution {
        let problem = MeasureProblem::new(1.0, 2.0).with_grid(64, 32);
        let r = problem.radii();
        let phi = problem.angles();
        let omega = r
            .iter()
            .flat_map(|&ri| phi.iter().map(move |_| ri.powf(kappa)))
            .collect();
        MeasureSolution {
            problem,
            r,
            phi,
            omega,
            iterations: 0,
            final_update: 0.0,
            converged: true,
            energy_history: Vec::new(),
            relaxation: 1.0,
            linear_iterations: 0,
        }
    }

    #[test]
    fn planted_power_law() {
        let sol = planted(1.37);
        let fit = fit_default(&sol).unwrap();
        assert!((fit.exponent - 1.37).abs() < 1e-10);
        assert!(fit.rms < 1e-12);
        let off_axis = fit_slope(&sol, 0.3, (0.05, 0.4)).unwrap();
        assert!((off_axis.exponent - 1.37).abs() < 1e-10);
        let (lo, hi) = comparability_constants(&sol, 1.37, Region::S2Nu).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_windows() {
        let sol = planted(1.0);
        assert!(fit_slope(&sol, 0.0, (0.4, 0.05)).is_err());
        assert!(fit_slope(&sol, 0.0, (0.1, 0.11)).is_err());
        assert!(fit_slope(&sol, 0.0, (0.1, 1.5)).is_err());
        assert!(comparability_constants(&sol, 0.0, Region::SNu).is_err());
    }
}
