//! Numerical p-harmonic measure of the arc `∂B(0,R) ∩ S_ν` relative to
//! `B(0,R) ∩ S_ν`, with a walk-on-spheres oracle for `p = 2`.

pub mod fit;
pub mod linear;
pub mod mc;
pub mod problem;
pub mod solver;

use serde::Serialize;

use crate::error::Result;

pub use fit::{comparability_constants, comparability_within, fit_default, fit_slope, Region, SlopeFit};
pub use mc::{mc_harmonic_measure, McEstimate};
pub use problem::{ArcTarget, MeasureProblem, RadialSpacing};
pub use solver::{solve_measure, solve_measure_with, MeasureSolution};

/// JSON summary of a solve.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureSummary {
    pub problem: MeasureProblem,
    pub iterations: usize,
    pub linear_iterations: usize,
    pub tolerance: f64,
    pub final_update: f64,
    pub converged: bool,
    pub relaxation: f64,
    pub final_energy: f64,
    pub slope_fits: Vec<SlopeFit>,
}

impl MeasureSolution {
    pub fn summary(&self, slope_fits: Vec<SlopeFit>) -> MeasureSummary {
        MeasureSummary {
            problem: self.problem.clone(),
            iterations: self.iterations,
            linear_iterations: self.linear_iterations,
            tolerance: self.problem.tolerance,
            final_update: self.final_update,
            converged: self.converged,
            relaxation: self.relaxation,
            final_energy: self.energy_history.last().copied().unwrap_or(f64::NAN),
            slope_fits,
        }
    }

    pub fn summary_json(&self, slope_fits: Vec<SlopeFit>) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.summary(slope_fits))?)
    }
}
