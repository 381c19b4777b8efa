//! Angular profiles `f_{ν,p}` of the positive p-harmonic functions
//! `u = r^k f(φ)` vanishing on the sides of the sector.
//!
//! Four constructions, selected by `p`:
//!
//! * `p = 2`: `f = cos(νφ)`.
//! * `2 < p < ∞`: closed form through the angle map `θ(φ)`.
//! * `p = ∞`: the same with `a = 1` (a cone/plane plateau map when `ν ≤ 1`).
//! * `1 < p < 2`: stream function of the profile for the conjugate exponent
//!   `p/(p−1)`, built on the extended range `[−π/(2ν), π/ν]`, rotated by
//!   `π/(2ν)` and rescaled to `f(0) = 1`.

pub mod angle_map;
pub mod interp;
pub mod stream;

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::exponent::{radial_exponent, PExponent, SectorSpec};
use crate::par::Execution;

pub use angle_map::{eval_f, eval_fprime, phi_of_theta, theta_of_phi, AngleMap};
pub use interp::MonotoneCubic;
pub use stream::{stream_conjugate, ExtendedTable, StreamIdentities, StreamPair};

/// Below this distance from 2, a finite `p` uses the `p = 2` closed form.
pub const P2_SNAP: f64 = 1e-6;
/// Oversampling of the conjugate base profile for `1 < p < 2`.
pub const STREAM_OVERSAMPLING: usize = 4;
pub const MIN_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    #[serde(rename = "P2_CLOSED")]
    P2Closed,
    #[serde(rename = "P_GT2_ANGLEMAP")]
    PGt2AngleMap,
    #[serde(rename = "P_INF_ANGLEMAP")]
    PInfAngleMap,
    #[serde(rename = "P_LT2_STREAM")]
    PLt2Stream,
}

impl CaseTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseTag::P2Closed => "P2_CLOSED",
            CaseTag::PGt2AngleMap => "P_GT2_ANGLEMAP",
            CaseTag::PInfAngleMap => "P_INF_ANGLEMAP",
            CaseTag::PLt2Stream => "P_LT2_STREAM",
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A point `(r, φ)` in polar coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub r: f64,
    pub phi: f64,
}

impl PolarPoint {
    pub fn new(r: f64, phi: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(domain("r must be > 0"));
        }
        if !(phi.abs() <= PI) {
            return Err(domain("|phi| must be <= pi"));
        }
        Ok(PolarPoint { r, phi })
    }

    pub fn to_cartesian(&self) -> [f64; 2] {
        [self.r * self.phi.cos(), self.r * self.phi.sin()]
    }
}

/// `(cos νφ, −ν sin νφ)`.
pub fn eval_f_p2(phi: f64, nu: f64) -> (f64, f64) {
    let (s, c) = (nu * phi).sin_cos();
    (c, -nu * s)
}

#[derive(Debug, Clone)]
enum Exact {
    Closed,
    Map(AngleMap),
    Stream {
        map: AngleMap,
        p: f64,
        k: f64,
        lambda: f64,
        scale: f64,
    },
}

/// Realized constants of the band bounds on `f` and `f′`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandConstants {
    pub max_abs_fprime: f64,
    /// `min f` on `|φ| ≤ π/(4ν)`.
    pub min_f_middle: f64,
    /// `min |f′|` on samples with `π/(4ν) < |φ| ≤ π/(2ν)`.
    pub min_abs_fprime_outer: f64,
    /// Smallest `c ≥ 1` satisfying all bounds on the sampled table.
    pub c: f64,
}

/// Tabulated angular profile with exact re-evaluation.
#[derive(Debug, Clone)]
pub struct AngularProfile {
    pub sector: SectorSpec,
    pub p: PExponent,
    pub k: f64,
    /// The factor that brings the raw construction to `f(0) = 1`.
    pub normalization: f64,
    pub case: CaseTag,
    pub phi: Vec<f64>,
    /// Angle-map angle of each row. For `P2_CLOSED` this is `νφ`; for
    /// `P_LT2_STREAM` it is the base-map angle at the rotated point `φ + π/(2ν)`.
    pub theta: Vec<f64>,
    pub f: Vec<f64>,
    pub fprime: Vec<f64>,
    exact: Exact,
    interp: MonotoneCubic,
    stream: Option<Box<StreamPair>>,
}

/// Number of table rows for a requested sample count: always odd, so that the
/// grid contains `φ = 0` together with both sides.
pub fn table_rows(n_samples: usize) -> usize {
    2 * n_samples.div_ceil(2) + 1
}

fn uniform(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Builds the profile for `(ν, p)` on `table_rows(n_samples)` rows.
pub fn build_profile(sector: SectorSpec, p: PExponent, n_samples: usize) -> Result<AngularProfile> {
    build_profile_with(sector, p, n_samples, Execution::default())
}

pub fn build_profile_with(
    sector: SectorSpec,
    p: PExponent,
    n_samples: usize,
    exec: Execution,
) -> Result<AngularProfile> {
    if n_samples < MIN_SAMPLES {
        return Err(domain(format!("n_samples must be >= {MIN_SAMPLES}")));
    }
    let rows = table_rows(n_samples);
    let half = sector.half_aperture();
    let phi = uniform(-half, half, rows);
    let k = radial_exponent(sector, p).k;
    let nu = sector.nu();

    let profile = match p.value() {
        Some(v) if (v - 2.0).abs() < P2_SNAP => {
            let (f, fprime) = phi.iter().map(|&x| eval_f_p2(x, nu)).unzip();
            let theta = phi.iter().map(|&x| nu * x).collect();
            assemble(
                sector,
                p,
                nu,
                1.0,
                CaseTag::P2Closed,
                phi,
                theta,
                f,
                fprime,
                Exact::Closed,
                None,
            )
        }
        Some(v) if v < 2.0 => build_stream(sector, p, v, rows, exec)?,
        _ => {
            let map = AngleMap::new(sector, p)?;
            let table = ExtendedTable::tabulate(map, phi, exec)?;
            let case = if p.is_infinite() {
                CaseTag::PInfAngleMap
            } else {
                CaseTag::PGt2AngleMap
            };
            assemble(
                sector,
                p,
                k,
                map.normalization(),
                case,
                table.phi,
                table.theta,
                table.f,
                table.fprime,
                Exact::Map(map),
                None,
            )
        }
    };
    profile.check_invariants()?;
    Ok(profile)
}

fn build_stream(sector: SectorSpec, p: PExponent, q: f64, rows: usize, exec: Execution) -> Result<AngularProfile> {
    let nu = sector.nu();
    let half = sector.half_aperture();
    let base_p = p.conjugate()?;
    let map = AngleMap::new(sector, base_p)?;
    // Base grid on [−π/(2ν), π/ν] with spacing h/STREAM_OVERSAMPLING, where h
    // is the output spacing; every output row maps to a base node.
    let over = STREAM_OVERSAMPLING;
    let base_rows = 3 * over * (rows - 1) / 2 + 1;
    let base_phi = uniform(-half, PI / nu, base_rows);
    let base = ExtendedTable::tabulate(map, base_phi, exec)?;
    let pair = stream_conjugate(&base, q)?;
    let offset = over * (rows - 1) / 2;
    let node = |i: usize| offset + over * i;
    let centre = node((rows - 1) / 2);
    let scale = 1.0 / pair.g[centre];

    let phi = uniform(-half, half, rows);
    let theta = (0..rows).map(|i| pair.theta[node(i)]).collect();
    let f = (0..rows).map(|i| pair.g[node(i)] * scale).collect();
    let fprime = (0..rows).map(|i| pair.gprime[node(i)] * scale).collect();
    let exact = Exact::Stream {
        map,
        p: pair.p,
        k: pair.k,
        lambda: pair.lambda,
        scale,
    };
    Ok(assemble(
        sector,
        p,
        pair.lambda,
        scale,
        CaseTag::PLt2Stream,
        phi,
        theta,
        f,
        fprime,
        exact,
        Some(Box::new(pair)),
    ))
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    sector: SectorSpec,
    p: PExponent,
    k: f64,
    normalization: f64,
    case: CaseTag,
    phi: Vec<f64>,
    theta: Vec<f64>,
    f: Vec<f64>,
    fprime: Vec<f64>,
    exact: Exact,
    stream: Option<Box<StreamPair>>,
) -> AngularProfile {
    // The sides are zeros of f by construction; drop the O(1e-16) rounding
    // that can leave them slightly negative.
    let mut f = f;
    let n = f.len();
    f[0] = 0.0;
    f[n - 1] = 0.0;
    let interp = MonotoneCubic::new(&phi, &f, &fprime);
    AngularProfile {
        sector,
        p,
        k,
        normalization,
        case,
        phi,
        theta,
        f,
        fprime,
        exact,
        interp,
        stream,
    }
}

fn invariant(name: &'static str, detail: String) -> Error {
    Error::Invariant { name, detail }
}

impl AngularProfile {
    pub fn nu(&self) -> f64 {
        self.sector.nu()
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    /// Index of the `φ = 0` row.
    pub fn centre(&self) -> usize {
        (self.phi.len() - 1) / 2
    }

    /// The conjugate pair behind a `P_LT2_STREAM` profile.
    pub fn stream_pair(&self) -> Option<&StreamPair> {
        self.stream.as_deref()
    }

    /// The angle map behind the profile (the base map for the stream case).
    pub fn angle_map(&self) -> Option<&AngleMap> {
        match &self.exact {
            Exact::Closed => None,
            Exact::Map(m) | Exact::Stream { map: m, .. } => Some(m),
        }
    }

    /// Angles at which the profile is not `C²`: the ridge `φ = 0` at `p = ∞`
    /// and the plateau edges of the degenerate `p = ∞` map.
    pub fn singular_angles(&self) -> Vec<f64> {
        if self.case != CaseTag::PInfAngleMap {
            return Vec::new();
        }
        let mut out = vec![0.0];
        if let Some(w) = self.angle_map().and_then(|m| m.plateau_half_width()) {
            if w > 0.0 {
                out.extend([-w, w]);
            }
        }
        out
    }

    /// `(θ, f, f′)` at an arbitrary angle, evaluated without the table.
    pub fn exact(&self, phi: f64) -> Result<(f64, f64, f64)> {
        match &self.exact {
            Exact::Closed => {
                let (f, fp) = eval_f_p2(phi, self.nu());
                Ok((self.nu() * phi, f, fp))
            }
            Exact::Map(m) => m.eval(phi),
            Exact::Stream {
                map,
                p,
                k,
                lambda,
                scale,
            } => {
                let (theta, f, fp) = map.eval(phi + self.sector.half_aperture())?;
                let (g, gp) = stream::conjugate_point(f, fp, *k, *p, *lambda);
                Ok((theta, g * scale, gp * scale))
            }
        }
    }

    /// `u(r, φ) = r^k f(φ)` using the exact profile.
    pub fn u_exact(&self, r: f64, phi: f64) -> Result<f64> {
        Ok(r.powf(self.k) * self.exact(phi)?.1)
    }

    /// `f` and `f′` interpolated from the table.
    pub fn interpolate(&self, phi: f64) -> (f64, f64) {
        self.interp.eval(phi)
    }

    pub fn band_constants(&self) -> BandConstants {
        let quarter = PI / (4.0 * self.nu());
        let mut out = BandConstants {
            max_abs_fprime: 0.0,
            min_f_middle: f64::INFINITY,
            min_abs_fprime_outer: f64::INFINITY,
            c: 1.0,
        };
        for ((&x, &f), &fp) in self.phi.iter().zip(&self.f).zip(&self.fprime) {
            out.max_abs_fprime = out.max_abs_fprime.max(fp.abs());
            if x.abs() <= quarter * (1.0 + 1e-12) {
                out.min_f_middle = out.min_f_middle.min(f);
            } else {
                out.min_abs_fprime_outer = out.min_abs_fprime_outer.min(fp.abs());
            }
        }
        out.c = 1f64
            .max(out.max_abs_fprime)
            .max(1.0 / out.min_f_middle)
            .max(1.0 / out.min_abs_fprime_outer);
        out
    }

    /// Build-time checks of the boundary values, range, symmetry, monotonicity
    /// and band bounds.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.len();
        let c = self.centre();
        if (self.f[c] - 1.0).abs() > 1e-12 {
            return Err(invariant("f(0) = 1", format!("f(0) = {}", self.f[c])));
        }
        if self.fprime[c].abs() > 1e-9 {
            return Err(invariant("f'(0) = 0", format!("f'(0) = {}", self.fprime[c])));
        }
        for end in [0, n - 1] {
            if self.f[end].abs() > 1e-9 {
                return Err(invariant(
                    "f(side) = 0",
                    format!("f({}) = {}", self.phi[end], self.f[end]),
                ));
            }
        }
        for i in 0..n {
            let f = self.f[i];
            if !(-1e-12..=1.0 + 1e-12).contains(&f) {
                return Err(invariant("0 <= f <= 1", format!("f({}) = {f}", self.phi[i])));
            }
            let j = n - 1 - i;
            if (f - self.f[j]).abs() > 1e-10 || (self.fprime[i] + self.fprime[j]).abs() > 1e-10 {
                return Err(invariant("symmetry", format!("rows {i} and {j} differ")));
            }
        }
        for i in c..n - 1 {
            if self.f[i + 1] > self.f[i] + 1e-14 {
                return Err(invariant("f nonincreasing on [0, pi/(2nu)]", format!("at row {i}")));
            }
        }
        let band = self.band_constants();
        if !(band.min_f_middle > 0.0) {
            return Err(invariant("f > 0 on middle band", format!("{}", band.min_f_middle)));
        }
        if !(band.min_abs_fprime_outer > 0.0) {
            return Err(invariant(
                "|f'| > 0 off middle band",
                format!("{}", band.min_abs_fprime_outer),
            ));
        }
        Ok(())
    }

    /// Writes `phi,theta,f,fprime` with `#` comment lines carrying the metadata.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# nu: {}", self.nu())?;
        writeln!(w, "# p: {}", self.p)?;
        writeln!(w, "# k: {}", self.k)?;
        writeln!(w, "# case: {}", self.case)?;
        writeln!(w, "phi,theta,f,fprime")?;
        for i in 0..self.len() {
            writeln!(w, "{},{},{},{}", self.phi[i], self.theta[i], self.f[i], self.fprime[i])?;
        }
        Ok(())
    }
}

/// Evaluates `u = r^k f(φ)` with `f` interpolated from the profile table.
pub fn eval_u(point: PolarPoint, profile: &AngularProfile) -> Result<f64> {
    let half = profile.sector.half_aperture();
    if point.phi.abs() > half * (1.0 + 1e-14) {
        return Err(domain(format!("point outside the sector: |phi| > {half}")));
    }
    Ok(point.r.powf(profile.k) * profile.interpolate(point.phi).0)
}

/// Metadata and rows parsed back from a profile CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCsv {
    pub nu: f64,
    pub p: String,
    pub k: f64,
    pub case: String,
    pub rows: Vec<[f64; 4]>,
}

pub fn read_profile_csv(text: &str) -> Result<ProfileCsv> {
    let mut meta = std::collections::HashMap::new();
    let mut rows = Vec::new();
    let mut header_seen = false;
    for line in text.lines() {
        if let Some(c) = line.strip_prefix('#') {
            if let Some((key, val)) = c.split_once(':') {
                meta.insert(key.trim().to_string(), val.trim().to_string());
            }
            continue;
        }
        if !header_seen {
            if line.trim() != "phi,theta,f,fprime" {
                return Err(domain(format!("unexpected profile header `{line}`")));
            }
            header_seen = true;
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| domain(format!("bad profile row `{line}`: {e}")))?;
        if vals.len() != 4 {
            return Err(domain(format!("profile row needs 4 columns: `{line}`")));
        }
        rows.push([vals[0], vals[1], vals[2], vals[3]]);
    }
    let get = |k: &str| {
        meta.get(k)
            .cloned()
            .ok_or_else(|| domain(format!("missing `# {k}:` header")))
    };
    let num = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| domain(format!("bad `{k}` header"))) };
    Ok(ProfileCsv {
        nu: num("nu")?,
        p: get("p")?,
        k: num("k")?,
        case: get("case")?,
        rows,
    })
}
