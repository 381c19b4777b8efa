use std::time::Instant;

use psector::experiments::{run_growth_bounds, run_mc_agreement, run_measure_experiment};
use psector::measure::{comparability_constants, solve_measure, MeasureProblem, Region};
use psector::{k_of, PExponent};

use super::{check, Criterion, Outcome};

const SEED: u64 = 20_240_917;

pub fn criteria() -> Vec<Criterion> {
    vec![
        (7, "measure slopes", c7_measure_slopes),
        (8, "walk-on-spheres oracle", c8_walk_on_spheres),
        (10, "cusp witness", c10_cusp),
    ]
}

fn c7_measure_slopes() -> Outcome {
    let cases = [
        (1.0, 2.0, 0.05),
        (2.0, 2.0, 0.05),
        (1.0, 4.0, 0.10),
        (2.0, 3.0, 0.10),
        (1.0, 1.5, 0.10),
    ];
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    for (nu, p, tol) in cases {
        let t = Instant::now();
        let rep = run_measure_experiment(&MeasureProblem::new(nu, p), tol).unwrap();
        let secs = t.elapsed().as_secs_f64();
        let fitted = rep.parameters["fitted_exponent"].as_f64().unwrap();
        let k = rep.parameters["k"].as_f64().unwrap();
        notes.push(format!("({nu},{p}) {:+.2}% in {secs:.1}s", 100.0 * (fitted / k - 1.0)));
        if let Some(f) = rep.first_failure() {
            failures.push(format!("({nu},{p}) {}: {}", f.name, f.detail));
        }
        if secs > 60.0 {
            failures.push(format!("({nu},{p}) took {secs:.1}s"));
        }
        // mesh stability of the comparability ratios on S_2nu
        let a = (
            rep.parameters["ratio_min"].as_f64().unwrap(),
            rep.parameters["ratio_max"].as_f64().unwrap(),
        );
        let fine = solve_measure(&MeasureProblem::new(nu, p).with_grid(512, 512)).unwrap();
        let b = comparability_constants(&fine, k_of(nu, PExponent::finite(p).unwrap()).unwrap(), Region::S2Nu).unwrap();
        let drift = ((a.0 - b.0) / a.0).abs().max(((a.1 - b.1) / a.1).abs());
        if drift >= 0.02 {
            failures.push(format!("({nu},{p}) ratio drift {drift:.4}"));
        }
        notes.push(format!("drift {:.2}%", 100.0 * drift));
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            notes.join(", ")
        } else {
            failures.join("; ")
        },
    )
}

fn c8_walk_on_spheres() -> Outcome {
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    let t = Instant::now();
    for nu in [1.0, 2.0] {
        let rep = run_mc_agreement(&MeasureProblem::new(nu, 2.0), 100_000, SEED).unwrap();
        let z = rep.rows.iter().map(|r| r["z"].as_f64().unwrap()).fold(0.0, f64::max);
        notes.push(format!("nu={nu}: max |z| {z:.2}"));
        if let Some(f) = rep.first_failure() {
            failures.push(format!("nu={nu}: {}", f.detail));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    if secs > 60.0 {
        failures.push(format!("took {secs:.1}s"));
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} (bound 3, 10 points, 1e5 walks)", notes.join(", "))
        } else {
            failures.join("; ")
        },
    )
}

fn c10_cusp() -> Outcome {
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    for (nu, p) in [(8.0, 2.0), (0.51, 3.0)] {
        let t = Instant::now();
        let rep = run_growth_bounds(&MeasureProblem::new(nu, p)).unwrap();
        let secs = t.elapsed().as_secs_f64();
        let fitted = rep.parameters["fitted_exponent"].as_f64().unwrap();
        notes.push(format!("({nu},{p}) fitted {fitted:.4} in {secs:.1}s"));
        if let Some(f) = rep.first_failure() {
            failures.push(format!("({nu},{p}) {}: {}", f.name, f.detail));
        }
        if secs > 120.0 {
            failures.push(format!("({nu},{p}) took {secs:.1}s"));
        }
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} (>= 5; within 15% of 2/3)", notes.join(", "))
        } else {
            failures.join("; ")
        },
    )
}
