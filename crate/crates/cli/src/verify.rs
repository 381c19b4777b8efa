use std::path::Path;
use std::time::Instant;

use clap::Args;
use psector::experiments::{
    default_slope_tolerance, run_exponent_table, run_growth_bounds, run_mc_agreement, run_measure_experiment,
    run_pde_residuals, run_phragmen_check, run_profile_checks, run_stream_consistency, ExperimentReport,
};
use psector::measure::MeasureProblem;
use psector::PExponent;

use crate::config::CliConfig;
use crate::Failure;

pub const SUITES: [&str; 6] = ["exponent", "profile", "pde", "measure", "stream", "phragmen"];
const VERIFY_SEED: u64 = 20_240_917;

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// exponent, profile, pde, measure, stream, phragmen or all.
    pub suite: String,
    /// Reduced grids.
    #[arg(long)]
    pub quick: bool,
}

type Job = Box<dyn Fn() -> psector::Result<ExperimentReport>>;

fn p(x: f64) -> PExponent {
    PExponent::finite(x).expect("literal p > 1")
}

fn profile_cases(quick: bool) -> Vec<(f64, PExponent)> {
    let nus: &[f64] = if quick {
        &[0.5, 1.0, 2.0]
    } else {
        &[0.5, 0.75, 1.0, 2.0, 4.0]
    };
    let ps = if quick {
        vec![p(1.5), p(2.0), p(3.0), PExponent::INFINITY]
    } else {
        vec![p(1.2), p(1.5), p(2.0), p(3.0), p(4.0), p(10.0), PExponent::INFINITY]
    };
    nus.iter().flat_map(|&nu| ps.iter().map(move |&q| (nu, q))).collect()
}

fn jobs(suite: &str, quick: bool, cfg: &CliConfig) -> Vec<Job> {
    let samples = cfg.samples.unwrap_or(if quick { 128 } else { 512 });
    let mut out: Vec<Job> = Vec::new();
    match suite {
        "exponent" => {
            let nus: Vec<f64> = if quick {
                vec![0.5, 0.75, 1.0, 2.0, 4.0]
            } else {
                (0..=30).map(|i| 0.5 + 0.25 * i as f64).collect()
            };
            let ps = vec![p(1.1), p(1.5), p(2.0), p(3.0), p(10.0), p(100.0), PExponent::INFINITY];
            out.push(Box::new(move || run_exponent_table(&nus, &ps)));
        }
        "profile" => {
            for (nu, q) in profile_cases(quick) {
                out.push(Box::new(move || run_profile_checks(nu, q, samples)));
            }
        }
        "pde" => {
            for (nu, q) in profile_cases(quick) {
                if q.value() != Some(2.0) {
                    out.push(Box::new(move || run_pde_residuals(nu, q)));
                }
            }
        }
        "stream" => {
            let qs: &[f64] = if quick { &[1.2, 1.5] } else { &[1.1, 1.2, 1.5, 1.8] };
            for &nu in &[0.75, 1.0, 2.0] {
                for &q in qs {
                    out.push(Box::new(move || run_stream_consistency(nu, q, samples)));
                }
            }
        }
        "phragmen" => {
            for &(nu, q) in &[(1.0, p(2.0)), (2.0, p(3.0)), (0.75, p(1.5)), (2.0, PExponent::INFINITY)] {
                out.push(Box::new(move || run_phragmen_check(nu, q, &[1.0, 10.0, 100.0, 1000.0])));
            }
        }
        "measure" => {
            let grid = if quick { 128 } else { MeasureProblem::DEFAULT_GRID };
            let n_grid = (cfg.n_r.unwrap_or(grid), cfg.n_phi.unwrap_or(grid));
            let problem = move |nu: f64, q: f64| {
                let mut pr = MeasureProblem::new(nu, q).with_grid(n_grid.0, n_grid.1);
                pr.eps_reg = cfg.eps_reg.unwrap_or(pr.eps_reg);
                pr.tolerance = cfg.tolerance.unwrap_or(pr.tolerance);
                pr.max_iterations = cfg.max_iterations.unwrap_or(pr.max_iterations);
                pr
            };
            let cases: &[(f64, f64)] = if quick {
                &[(1.0, 2.0), (2.0, 3.0)]
            } else {
                &[(1.0, 2.0), (2.0, 2.0), (1.0, 4.0), (2.0, 3.0), (0.75, 3.0), (1.0, 1.5)]
            };
            for &(nu, q) in cases {
                let pr = problem(nu, q);
                out.push(Box::new(move || {
                    run_measure_experiment(&pr, default_slope_tolerance(nu, q))
                }));
            }
            let walks = cfg.walks.unwrap_or(if quick { 20_000 } else { 100_000 });
            let seed = cfg.seed.unwrap_or(VERIFY_SEED);
            let pr = problem(1.0, 2.0);
            out.push(Box::new(move || run_mc_agreement(&pr, walks, seed)));
            if !quick {
                let pr = problem(2.0, 2.0);
                out.push(Box::new(move || run_mc_agreement(&pr, walks, seed)));
                for &(nu, q) in &[(8.0, 2.0), (0.51, 3.0)] {
                    let pr = problem(nu, q);
                    out.push(Box::new(move || run_growth_bounds(&pr)));
                }
            }
        }
        _ => {}
    }
    out
}

pub fn verify(a: &VerifyArgs, cfg: &CliConfig, out: &Path) -> Result<(), Failure> {
    let suites: Vec<&str> = match a.suite.as_str() {
        "all" => SUITES.to_vec(),
        s if SUITES.contains(&s) => vec![s],
        s => {
            return Err(Failure::usage(format!(
                "unknown suite `{s}` (expected one of {}, all)",
                SUITES.join(", ")
            )))
        }
    };
    let mut first_failure: Option<String> = None;
    let mut total = 0usize;
    for suite in suites {
        for job in jobs(suite, a.quick, cfg) {
            let t = Instant::now();
            let rep = match job() {
                Ok(rep) => rep,
                Err(e) => {
                    println!("FAIL {suite}: {e}");
                    first_failure.get_or_insert_with(|| format!("{suite}: {e}"));
                    continue;
                }
            };
            rep.write_files(out)?;
            total += 1;
            let secs = t.elapsed().as_secs_f64();
            match rep.first_failure() {
                None => println!("PASS {suite} {} ({secs:.1}s)", rep.file_stem()),
                Some(f) => {
                    println!(
                        "FAIL {suite} {}: {}: {} ({secs:.1}s)",
                        rep.file_stem(),
                        f.name,
                        f.detail
                    );
                    first_failure.get_or_insert_with(|| format!("{}: {}", rep.file_stem(), f.name));
                }
            }
        }
    }
    match first_failure {
        None => {
            println!("{total} reports passed");
            Ok(())
        }
        Some(name) => Err(Failure::new(1, format!("first failed criterion: {name}"))),
    }
}
