//! Walk-on-spheres estimate of the harmonic (`p = 2`) measure of the arc.
//!
//! Each walk jumps to a uniform point on the largest circle inside
//! `B(0,R) ∩ S_ν` and stops once it is within the absorption shell of the
//! boundary; it scores 1 if the nearest boundary piece is the arc.
//! Walks run in fixed batches, each with its own ChaCha stream keyed by
//! `(seed, point, batch)`, so results do not depend on the thread count.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::par::{self, Execution};
use crate::profile::PolarPoint;

pub const BATCH: usize = 4096;
/// Absorption shell width relative to `R`.
pub const DEFAULT_SHELL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub walks: usize,
}

/// Distance from `(r, φ)` to the boundary and whether the arc is closest.
fn boundary_distance(r: f64, phi: f64, half: f64, big_r: f64) -> (f64, bool) {
    let side = |alpha: f64| {
        let delta = phi - alpha;
        if delta.abs() <= PI / 2.0 {
            r * delta.sin().abs()
        } else {
            r
        }
    };
    let sides = side(half).min(side(-half));
    let arc = big_r - r;
    if arc < sides {
        (arc, true)
    } else {
        (sides, false)
    }
}

fn walk(mut x: [f64; 2], half: f64, big_r: f64, shell: f64, rng: &mut ChaCha8Rng) -> bool {
    loop {
        let r = x[0].hypot(x[1]);
        let phi = x[1].atan2(x[0]);
        if phi.abs() >= half {
            return false;
        }
        let (d, arc) = boundary_distance(r, phi, half, big_r);
        if d < shell {
            return arc;
        }
        let t: f64 = rng.random::<f64>() * 2.0 * PI;
        x[0] += d * t.cos();
        x[1] += d * t.sin();
    }
}

fn stream_id(point: usize, batch: usize) -> u64 {
    ((point as u64) << 32) | batch as u64
}

pub fn mc_harmonic_measure(
    nu: f64,
    big_r: f64,
    points: &[PolarPoint],
    n_walks: usize,
    seed: u64,
) -> Result<Vec<McEstimate>> {
    mc_harmonic_measure_with(nu, big_r, points, n_walks, seed, DEFAULT_SHELL, Execution::default())
}

pub fn mc_harmonic_measure_with(
    nu: f64,
    big_r: f64,
    points: &[PolarPoint],
    n_walks: usize,
    seed: u64,
    shell: f64,
    exec: Execution,
) -> Result<Vec<McEstimate>> {
    if !(nu >= 0.5) {
        return Err(domain("nu must be >= 0.5"));
    }
    if !(big_r > 0.0) {
        return Err(domain("R must be > 0"));
    }
    if n_walks == 0 {
        return Err(domain("n_walks must be >= 1"));
    }
    let half = PI / (2.0 * nu);
    for q in points {
        if q.r >= big_r || q.phi.abs() >= half {
            return Err(domain("MC points must be interior"));
        }
    }
    let shell = shell * big_r;
    let batches = n_walks.div_ceil(BATCH);
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|pt| (0..batches).map(move |b| (pt, b)))
        .collect();
    let hits = par::map(exec, &jobs, |&(pt, b)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id(pt, b));
        let count = BATCH.min(n_walks - b * BATCH);
        let start = points[pt].to_cartesian();
        (0..count).filter(|_| walk(start, half, big_r, shell, &mut rng)).count()
    });
    Ok(hits
        .chunks(batches)
        .map(|c| {
            let h: usize = c.iter().sum();
            let est = h as f64 / n_walks as f64;
            McEstimate {
                estimate: est,
                stderr: (est * (1.0 - est) / n_walks as f64).sqrt(),
                walks: n_walks,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(r: f64, phi: f64) -> PolarPoint {
        PolarPoint::new(r, phi).unwrap()
    }

    #[test]
    fn limits_at_apex_and_arc() {
        let est = mc_harmonic_measure(1.0, 1.0, &[pt(1e-4, 0.0), pt(1.0 - 1e-6, 0.0)], 2000, 3).unwrap();
        assert!(est[0].estimate < 0.01);
        assert!(est[1].estimate > 0.99);
    }

    #[test]
    fn half_disk_centre_line() {
        let est = mc_harmonic_measure(1.0, 1.0, &[pt(0.5, 0.0)], 20_000, 11).unwrap()[0];
        let exact = 4.0 / PI * 0.5f64.atan();
        assert!((est.estimate - exact).abs() < 4.0 * est.stderr, "{est:?} vs {exact}");
    }

    #[test]
    fn deterministic_across_modes() {
        let pts = [pt(0.3, 0.1), pt(0.7, -0.4)];
        let a = mc_harmonic_measure_with(2.0, 1.0, &pts, 5000, 7, DEFAULT_SHELL, Execution::Sequential).unwrap();
        let b = mc_harmonic_measure_with(2.0, 1.0, &pts, 5000, 7, DEFAULT_SHELL, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        let c = mc_harmonic_measure_with(2.0, 1.0, &pts, 5000, 8, DEFAULT_SHELL, Execution::Parallel).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_exterior_points() {
        assert!(mc_harmonic_measure(2.0, 1.0, &[pt(0.5, 1.0)], 10, 0).is_err());
        assert!(mc_harmonic_measure(1.0, 1.0, &[pt(1.5, 0.0)], 10, 0).is_err());
    }
}
