use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RadialSpacing {
    Uniform,
    #[default]
    Logarithmic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ArcTarget {
    /// Data 1 on the whole arc.
    #[default]
    FullArc,
    /// Data 1 on `|φ| < π/(4ν)`, 1/2 at the two jump nodes, 0 beyond.
    InnerArc,
}

/// Dirichlet problem for the p-harmonic measure of the arc `|x| = R` in
/// `B(0,R) ∩ S_ν`, discretized on a polar grid `r_min ≤ r ≤ R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureProblem {
    pub nu: f64,
    pub p: f64,
    pub radius: f64,
    /// Radial intervals; the grid has `n_r + 1` rings.
    pub n_r: usize,
    /// Angular intervals; the grid has `n_phi + 1` rays.
    pub n_phi: usize,
    pub spacing: RadialSpacing,
    pub eps_reg: f64,
    /// Stop once the max-norm update falls below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    pub arc: ArcTarget,
    /// Innermost ring as a fraction of `R`; it carries the value 0.
    pub r_min_ratio: f64,
}

impl MeasureProblem {
    pub const DEFAULT_GRID: usize = 256;

    pub fn new(nu: f64, p: f64) -> Self {
        MeasureProblem {
            nu,
            p,
            radius: 1.0,
            n_r: Self::DEFAULT_GRID,
            n_phi: Self::DEFAULT_GRID,
            spacing: RadialSpacing::Logarithmic,
            eps_reg: 1e-6,
            tolerance: 1e-8,
            max_iterations: 500,
            arc: ArcTarget::FullArc,
            r_min_ratio: 1e-3,
        }
    }

    pub fn with_grid(mut self, n_r: usize, n_phi: usize) -> Self {
        self.n_r = n_r;
        self.n_phi = n_phi;
        self
    }

    pub fn with_arc(mut self, arc: ArcTarget) -> Self {
        self.arc = arc;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu >= 0.5) {
            return Err(domain("nu must be >= 0.5"));
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(domain("p must be finite and > 1"));
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(domain("R must be > 0"));
        }
        if self.n_r < 8 || self.n_phi < 8 {
            return Err(domain("n_r and n_phi must be >= 8"));
        }
        if self.arc == ArcTarget::InnerArc && !self.n_phi.is_multiple_of(4) {
            return Err(domain("inner_arc needs n_phi divisible by 4"));
        }
        if !(self.eps_reg > 0.0) {
            return Err(domain("eps_reg must be > 0"));
        }
        if !(self.tolerance > 0.0) {
            return Err(domain("tolerance must be > 0"));
        }
        if self.max_iterations == 0 {
            return Err(domain("max_iterations must be >= 1"));
        }
        if !(self.r_min_ratio > 0.0 && self.r_min_ratio < 1.0) {
            return Err(domain("r_min_ratio must lie in (0, 1)"));
        }
        Ok(())
    }

    pub fn half_aperture(&self) -> f64 {
        PI / (2.0 * self.nu)
    }

    /// Ring radii `r_0 = r_min < … < r_{n_r} = R`.
    pub fn radii(&self) -> Vec<f64> {
        let n = self.n_r;
        let r0 = self.r_min_ratio * self.radius;
        let mut r: Vec<f64> = (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64;
                match self.spacing {
                    RadialSpacing::Uniform => r0 + (self.radius - r0) * t,
                    RadialSpacing::Logarithmic => (r0.ln() + (self.radius / r0).ln() * t).exp(),
                }
            })
            .collect();
        r[0] = r0;
        r[n] = self.radius;
        r
    }

    pub fn angles(&self) -> Vec<f64> {
        let half = self.half_aperture();
        let n = self.n_phi;
        let mut phi: Vec<f64> = (0..=n).map(|j| -half + 2.0 * half * j as f64 / n as f64).collect();
        phi[n] = half;
        if n.is_multiple_of(2) {
            phi[n / 2] = 0.0;
        }
        phi
    }

    /// Prescribed value on the arc node `j`.
    pub fn arc_value(&self, j: usize) -> f64 {
        let n = self.n_phi;
        if j == 0 || j == n {
            return 0.0;
        }
        match self.arc {
            ArcTarget::FullArc => 1.0,
            ArcTarget::InnerArc => {
                // ±π/(4ν) are the nodes n/4 and 3n/4
                let q1 = n / 4;
                let q3 = 3 * n / 4;
                if j == q1 || j == q3 {
                    0.5
                } else if j > q1 && j < q3 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(MeasureProblem::new(1.0, 2.0).validate().is_ok());
        assert!(MeasureProblem::new(0.4, 2.0).validate().is_err());
        assert!(MeasureProblem::new(1.0, 1.0).validate().is_err());
        assert!(MeasureProblem::new(1.0, 2.0).with_grid(4, 64).validate().is_err());
        let p = MeasureProblem::new(1.0, 2.0)
            .with_grid(64, 66)
            .with_arc(ArcTarget::InnerArc);
        assert!(p.validate().is_err());
    }

    #[test]
    fn grids() {
        let p = MeasureProblem::new(2.0, 3.0).with_grid(16, 16);
        let r = p.radii();
        assert_eq!(r.len(), 17);
        assert_eq!(r[0], 1e-3);
        assert_eq!(r[16], 1.0);
        let ratio = r[1] / r[0];
        assert!((r[9] / r[8] - ratio).abs() < 1e-12);
        let phi = p.angles();
        assert_eq!(phi[8], 0.0);
        assert_eq!(phi[16], PI / 4.0);
    }

    #[test]
    fn inner_arc_data() {
        let p = MeasureProblem::new(1.0, 2.0)
            .with_grid(16, 16)
            .with_arc(ArcTarget::InnerArc);
        let data: Vec<f64> = (0..=16).map(|j| p.arc_value(j)).collect();
        let phi = p.angles();
        assert_eq!(data[4], 0.5);
        assert!((phi[4] + PI / 4.0).abs() < 1e-15);
        assert_eq!(data[8], 1.0);
        assert_eq!(data[2], 0.0);
        assert_eq!(data[12], 0.5);
    }
}
