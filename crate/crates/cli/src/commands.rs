use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use psector::experiments::{mc_probe_points, run_exponent_table};
use psector::measure::{
    comparability_within, fit_default, mc_harmonic_measure, solve_measure, ArcTarget, MeasureProblem, RadialSpacing,
    Region,
};
use psector::pde::profile_separation_report;
use psector::{
    build_profile, dk_dnu, dk_dp, radial_exponent, radial_exponent_roots, CaseTag, Execution, PExponent, PolarPoint,
    SectorSpec,
};
use serde_json::{json, Value};

use crate::config::CliConfig;
use crate::Failure;

pub const DEFAULT_SAMPLES: usize = 256;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_WALKS: usize = 20_000;

/// `x` rounded to 10 significant digits, printed in shortest form
/// (scientific notation outside `[1e-4, 1e15)`).
pub fn sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.9e}").parse().unwrap_or(x);
    let a = rounded.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{rounded:e}")
    } else {
        rounded.to_string()
    }
}

fn parse_p(s: &str) -> Result<PExponent, Failure> {
    Ok(PExponent::parse(s)?)
}

fn parse_list(s: &str) -> Result<Vec<String>, Failure> {
    let items: Vec<String> = s
        .split(',')
        .map(|t| t.trim().to_string())
        .filter(|t| !t.is_empty())
        .collect();
    if items.is_empty() {
        return Err(Failure::usage("empty list"));
    }
    Ok(items)
}

#[derive(Args, Debug)]
pub struct ExponentArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub nu: Option<f64>,
    /// A number > 1 or `inf`.
    #[arg(long)]
    pub p: Option<String>,
    /// Also print dk/dnu and dk/dp.
    #[arg(long)]
    pub derivatives: bool,
    /// Also print both roots of the exponent condition.
    #[arg(long)]
    pub roots: bool,
    /// Tabulate k over the grids and write CSV/JSON to the output directory.
    #[arg(long, conflicts_with_all = ["nu", "p"])]
    pub table: bool,
    #[arg(long, default_value = "0.5,0.6,0.75,1,1.25,1.5,2,2.5,3,4,6,8")]
    pub nu_grid: String,
    #[arg(long, default_value = "1.1,1.25,1.5,2,2.5,3,4,6,10,100,inf")]
    pub p_grid: String,
}

pub fn exponent(a: &ExponentArgs, out: &Path) -> Result<(), Failure> {
    if a.table {
        let nus = parse_list(&a.nu_grid)?
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Failure::usage(format!("cannot parse nu from `{s}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let ps = parse_list(&a.p_grid)?
            .iter()
            .map(|s| parse_p(s))
            .collect::<Result<Vec<_>, _>>()?;
        let rep = run_exponent_table(&nus, &ps)?;
        let (json, csv) = rep.write_files(out)?;
        println!("rows = {}", rep.rows.len());
        println!("csv = {}", csv.display());
        println!("json = {}", json.display());
        return match rep.first_failure() {
            None => Ok(()),
            Some(f) => Err(Failure::new(1, format!("{}: {}", f.name, f.detail))),
        };
    }
    let nu = a.nu.ok_or_else(|| Failure::usage("--nu is required"))?;
    let p = parse_p(a.p.as_deref().ok_or_else(|| Failure::usage("--p is required"))?)?;
    let sector = SectorSpec::new(nu)?;
    println!("k = {}", sig(radial_exponent(sector, p).k));
    if a.derivatives {
        println!("dk/dnu = {}", sig(dk_dnu(sector, p)?));
        match dk_dp(sector, p) {
            Ok(d) => println!("dk/dp = {}", sig(d)),
            Err(_) => println!("dk/dp = undefined"),
        }
    }
    if a.roots {
        let (k1, k2) = radial_exponent_roots(sector, p)?;
        println!("k1 = {}", sig(k1));
        println!("k2 = {}", sig(k2));
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct ProfileArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub nu: f64,
    #[arg(long)]
    pub p: String,
    #[arg(long)]
    pub samples: Option<usize>,
    /// CSV path; defaults to `profile_{nu}_{p}.csv` in the output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn profile(a: &ProfileArgs, cfg: &CliConfig, out: &Path) -> Result<(), Failure> {
    let p = parse_p(&a.p)?;
    let samples = a.samples.or(cfg.samples).unwrap_or(DEFAULT_SAMPLES);
    let prof = build_profile(SectorSpec::new(a.nu)?, p, samples)?;
    let path = match &a.out {
        Some(path) => path.clone(),
        None => out.join(format!("profile_{}_{}.csv", a.nu, p)),
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut buf = Vec::new();
    prof.write_csv(&mut buf)?;
    fs::write(&path, buf)?;

    let band = prof.band_constants();
    let n = prof.len();
    println!("case = {}", prof.case);
    println!("k = {}", sig(prof.k));
    println!("rows = {n}");
    println!("max |f'| = {}", sig(band.max_abs_fprime));
    println!("min f on middle band = {}", sig(band.min_f_middle));
    println!("min |f'| on outer band = {}", sig(band.min_abs_fprime_outer));
    println!("band constant c = {}", sig(band.c));
    println!("f(left side) = {}", sig(prof.f[0]));
    println!("f(right side) = {}", sig(prof.f[n - 1]));
    if prof.case != CaseTag::P2Closed {
        let rep = profile_separation_report(&prof, 1e-4, Execution::default())?;
        println!("max separation residual = {}", sig(rep.max_abs_residual));
    }
    println!("csv = {}", path.display());
    Ok(())
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum Spacing {
    Uniform,
    Log,
}

#[derive(Args, Debug)]
pub struct MeasureArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub nu: f64,
    #[arg(long)]
    pub p: String,
    /// Radius of the ball.
    #[arg(long = "R", visible_alias = "radius", default_value_t = 1.0)]
    pub radius: f64,
    #[arg(long)]
    pub n_r: Option<usize>,
    #[arg(long)]
    pub n_phi: Option<usize>,
    #[arg(long, value_enum, default_value = "log")]
    pub spacing: Spacing,
    #[arg(long)]
    pub eps_reg: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Boundary data 1 on the middle half of the arc only.
    #[arg(long)]
    pub inner_arc: bool,
    /// Compare against walk-on-spheres (p = 2 only).
    #[arg(long)]
    pub mc_check: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub walks: Option<usize>,
}

pub fn measure_problem(a: &MeasureArgs, cfg: &CliConfig) -> Result<MeasureProblem, Failure> {
    let p = parse_p(&a.p)?;
    let p = p.value().ok_or_else(|| Failure::usage("measure needs a finite p"))?;
    let mut pr = MeasureProblem::new(a.nu, p);
    pr.radius = a.radius;
    pr.n_r = a.n_r.or(cfg.n_r).unwrap_or(pr.n_r);
    pr.n_phi = a.n_phi.or(cfg.n_phi).unwrap_or(pr.n_phi);
    pr.eps_reg = a.eps_reg.or(cfg.eps_reg).unwrap_or(pr.eps_reg);
    pr.tolerance = a.tolerance.or(cfg.tolerance).unwrap_or(pr.tolerance);
    pr.max_iterations = a.max_iterations.or(cfg.max_iterations).unwrap_or(pr.max_iterations);
    pr.spacing = match a.spacing {
        Spacing::Uniform => RadialSpacing::Uniform,
        Spacing::Log => RadialSpacing::Logarithmic,
    };
    if a.inner_arc {
        pr.arc = ArcTarget::InnerArc;
    }
    pr.validate()?;
    Ok(pr)
}

pub fn measure(a: &MeasureArgs, cfg: &CliConfig, out: &Path) -> Result<(), Failure> {
    let pr = measure_problem(a, cfg)?;
    if a.mc_check && (pr.p != 2.0 || pr.arc == ArcTarget::InnerArc) {
        return Err(Failure::usage("--mc-check needs p = 2 and the full arc"));
    }
    let k = radial_exponent(SectorSpec::new(pr.nu)?, PExponent::finite(pr.p)?).k;
    let sol = solve_measure(&pr)?;
    let r_max = match pr.arc {
        ArcTarget::FullArc => pr.radius,
        ArcTarget::InnerArc => pr.radius / 2.0,
    };
    // a rough or unconverged field may not support a fit; the summary is
    // written regardless and records why
    let fit = fit_default(&sol);
    let ratios = comparability_within(&sol, k, Region::S2Nu, r_max)
        .and_then(|s2| Ok((s2, comparability_within(&sol, k, Region::SNu, r_max)?)));

    let fits = fit.as_ref().map(|f| vec![f.clone()]).unwrap_or_default();
    let mut summary = serde_json::to_value(sol.summary(fits)).map_err(|e| Failure::usage(e.to_string()))?;
    let obj = summary.as_object_mut().expect("summary is an object");
    obj.insert("k".into(), json!(k));
    let mut analysis_error = None;
    match &fit {
        Ok(f) => {
            obj.insert("slope".into(), json!(f.exponent));
        }
        Err(e) => {
            obj.insert("slope".into(), Value::Null);
            obj.insert("fit_error".into(), json!(e.to_string()));
            analysis_error = Some(e.to_string());
        }
    }
    match &ratios {
        Ok((s2, s1)) => {
            obj.insert(
                "comparability".into(),
                json!({ "s_2nu": [s2.0, s2.1], "s_nu": [s1.0, s1.1], "r_max": r_max }),
            );
        }
        Err(e) => {
            obj.insert("comparability".into(), Value::Null);
            obj.insert("comparability_error".into(), json!(e.to_string()));
            analysis_error.get_or_insert(e.to_string());
        }
    }
    if a.mc_check {
        let seed = a.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
        let walks = a.walks.or(cfg.walks).unwrap_or(DEFAULT_WALKS);
        obj.insert("mc_check".into(), mc_block(&sol, seed, walks)?);
    }

    fs::create_dir_all(out)?;
    let tag = if pr.arc == ArcTarget::InnerArc {
        "measure_inner"
    } else {
        "measure"
    };
    let stem = format!("{tag}_{}_{}", pr.nu, pr.p);
    let csv = out.join(format!("{stem}.csv"));
    let json_path = out.join(format!("{stem}.json"));
    let mut buf = Vec::new();
    sol.write_csv(&mut buf)?;
    fs::write(&csv, buf)?;
    fs::write(
        &json_path,
        serde_json::to_string_pretty(&summary).expect("valid json") + "\n",
    )?;

    println!("k = {}", sig(k));
    if let Ok(f) = &fit {
        println!("slope = {}", sig(f.exponent));
    }
    println!("sweeps = {}", sol.iterations);
    println!("final update = {}", sig(sol.final_update));
    if let Ok((s2, _)) = &ratios {
        println!("ratio on S_2nu in [{}, {}]", sig(s2.0), sig(s2.1));
    }
    if let Some(mc) = summary.get("mc_check") {
        println!("mc max |z| = {}", sig(mc["max_abs_z"].as_f64().unwrap_or(f64::NAN)));
    }
    println!("csv = {}", csv.display());
    println!("json = {}", json_path.display());
    if !sol.converged {
        return Err(Failure::new(
            4,
            format!(
                "solver did not converge in {} sweeps (final update {:e})",
                sol.iterations, sol.final_update
            ),
        ));
    }
    match analysis_error {
        Some(e) => Err(Failure::usage(e)),
        None => Ok(()),
    }
}

fn mc_block(sol: &psector::measure::MeasureSolution, seed: u64, walks: usize) -> Result<Value, Failure> {
    let pr = &sol.problem;
    let pts: Vec<PolarPoint> = mc_probe_points(pr.nu)
        .into_iter()
        .map(|q| PolarPoint {
            r: q.r * pr.radius,
            phi: q.phi,
        })
        .collect();
    let est = mc_harmonic_measure(pr.nu, pr.radius, &pts, walks, seed)?;
    let mut worst = 0f64;
    let mut rows = Vec::new();
    for (q, e) in pts.iter().zip(&est) {
        let v = sol.interpolate(q.r, q.phi);
        let z = (v - e.estimate).abs() / e.stderr.max(1e-300);
        worst = worst.max(z);
        rows.push(json!({ "r": q.r, "phi": q.phi, "solver": v, "mc": e.estimate, "stderr": e.stderr, "z": z }));
    }
    Ok(json!({
        "seed": seed,
        "walks": walks,
        "points": rows,
        "max_abs_z": worst,
        "within_3_stderr": worst <= 3.0,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_significant_digits() {
        assert_eq!(sig(1.0), "1");
        assert_eq!(sig(2.0 / 3.0), "0.6666666667");
        assert_eq!(sig(1.2345678901234), "1.23456789");
        assert_eq!(sig(-0.5), "-0.5");
        assert_eq!(sig(f64::INFINITY), "inf");
        assert_eq!(sig(2.0648686281e-7), "2.064868628e-7");
        assert_eq!(sig(0.0), "0");
    }
}
