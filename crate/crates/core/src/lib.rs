//! Explicit p-harmonic functions `r^k f(φ)` in planar sectors, residual
//! checks, and a numerical p-harmonic measure solver.
//!
//! The sector `S_ν = {|φ| < π/(2ν)}` has aperture `π/ν`, `ν ≥ 1/2`.

// Bounds checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod experiments;
pub mod exponent;
pub mod measure;
pub mod par;
pub mod pde;
pub mod profile;

pub use error::{Error, Result};
pub use exponent::{
    dk_dnu, dk_dp, exponent_condition_residual, k_of, radial_exponent, radial_exponent_roots, Branch, PExponent,
    RadialExponent, SectorSpec,
};
pub use par::Execution;
pub use profile::{build_profile, eval_f_p2, eval_u, AngularProfile, CaseTag, PolarPoint};
