use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use psector::experiments::mc_probe_points;
use psector::measure::mc::{mc_harmonic_measure_with, DEFAULT_SHELL};
use psector::measure::{solve_measure_with, MeasureProblem};
use psector::pde::profile_plap_report;
use psector::profile::build_profile_with;
use psector::{build_profile, Execution, PExponent, SectorSpec};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn profiles(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_profile");
    let sector = SectorSpec::new(2.0).unwrap();
    for (p, label) in [
        (PExponent::finite(3.0).unwrap(), "p3"),
        (PExponent::finite(1.5).unwrap(), "p1.5"),
    ] {
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, label), &p, |b, &p| {
                b.iter(|| build_profile_with(sector, p, black_box(1024), exec).unwrap())
            });
        }
    }
    g.finish();
}

fn residuals(c: &mut Criterion) {
    let mut g = c.benchmark_group("plap_residual");
    let prof = build_profile(SectorSpec::new(1.0).unwrap(), PExponent::finite(4.0).unwrap(), 256).unwrap();
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| profile_plap_report(&prof, 1.0, black_box(400), 1e-3, exec).unwrap())
        });
    }
    g.finish();
}

fn measure(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_measure");
    g.sample_size(10);
    for p in [2.0, 3.0] {
        let problem = MeasureProblem::new(1.0, p).with_grid(96, 96);
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, p), &problem, |b, pr| {
                b.iter(|| solve_measure_with(pr, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn walk_on_spheres(c: &mut Criterion) {
    let mut g = c.benchmark_group("walk_on_spheres");
    g.sample_size(10);
    let pts = mc_probe_points(1.0);
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| mc_harmonic_measure_with(1.0, 1.0, &pts, black_box(8192), 5, DEFAULT_SHELL, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, profiles, residuals, measure, walk_on_spheres);
criterion_main!(benches);
