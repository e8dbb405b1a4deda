//! Scheme registry, distortion-rate sweeps and magnitude profiles.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::polar::build_polar;
use crate::baselines::rect::{build_rect, square_side, ProductMode};
use crate::baselines::lbg::{train_lbg, MIN_SAMPLES_PER_CELL};
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::eval::mc_distortion;
use crate::highrate::{analytic_distortion_hr, analytic_rate_echr, analytic_rate_hr, build_highrate, rd_distortion, RadiusConvention};
use crate::lloydmax::{optimize_lloydmax, LloydMaxConfig};
use crate::source::SourceModel;

/// Quantizer families selectable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeTag {
    Highrate,
    Lloydmax,
    Lbg,
    Rect,
    Polar,
    RectUniform,
    PolarUniform,
}

impl SchemeTag {
    pub const ALL: [SchemeTag; 7] = [
        SchemeTag::Highrate,
        SchemeTag::Lloydmax,
        SchemeTag::Lbg,
        SchemeTag::Rect,
        SchemeTag::Polar,
        SchemeTag::RectUniform,
        SchemeTag::PolarUniform,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeTag::Highrate => "highrate",
            SchemeTag::Lloydmax => "lloydmax",
            SchemeTag::Lbg => "lbg",
            SchemeTag::Rect => "rect",
            SchemeTag::Polar => "polar",
            SchemeTag::RectUniform => "rect-uniform",
            SchemeTag::PolarUniform => "polar-uniform",
        }
    }

    pub fn is_golden(self) -> bool {
        matches!(self, SchemeTag::Highrate | SchemeTag::Lloydmax)
    }
}

impl fmt::Display for SchemeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidScheme(s.to_string()))
    }
}

/// Everything besides `(scheme, N, sigma2)` that determines a designed codebook.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignConfig {
    pub lloydmax: LloydMaxConfig,
    pub convention: RadiusConvention,
    /// LBG training seed.
    pub lbg_seed: u64,
    /// LBG training-set size per centroid.
    pub lbg_samples_per_cell: usize,
    pub lbg_tol: f64,
    pub lbg_max_iter: usize,
}

pub const DEFAULT_LBG_SAMPLES_PER_CELL: usize = 4000;
pub const DEFAULT_LBG_TOL: f64 = 1e-5;
pub const DEFAULT_LBG_MAX_ITER: usize = 500;

impl Default for DesignConfig {
    fn default() -> Self {
        DesignConfig {
            lloydmax: LloydMaxConfig::default(),
            convention: RadiusConvention::default(),
            lbg_seed: 0,
            lbg_samples_per_cell: DEFAULT_LBG_SAMPLES_PER_CELL,
            lbg_tol: DEFAULT_LBG_TOL,
            lbg_max_iter: DEFAULT_LBG_MAX_ITER,
        }
    }
}

/// Designs an `n`-point codebook of the given family.
pub fn build_scheme(tag: SchemeTag, n: usize, sigma2: f64, config: &DesignConfig) -> Result<Codebook> {
    if n == 0 {
        return Err(Error::InvalidN { scheme: tag.as_str(), n, reason: "N must be at least 1".into() });
    }
    match tag {
        SchemeTag::Highrate => build_highrate(n, sigma2, config.convention),
        SchemeTag::Lloydmax => Ok(optimize_lloydmax(n, sigma2, &config.lloydmax)?.0),
        SchemeTag::Lbg => {
            let samples = config.lbg_samples_per_cell.max(MIN_SAMPLES_PER_CELL) * n;
            Ok(train_lbg(n, sigma2, samples, config.lbg_seed, config.lbg_tol, config.lbg_max_iter)?.codebook)
        }
        SchemeTag::Rect | SchemeTag::RectUniform => {
            let side = square_side(n).ok_or_else(|| Error::InvalidN {
                scheme: tag.as_str(),
                n,
                reason: "a rectangular product quantizer needs a perfect-square N; \
                         the golden quantizers (highrate, lloydmax) accept any N"
                    .into(),
            })?;
            let mode = if tag == SchemeTag::Rect { ProductMode::Optimal } else { ProductMode::Uniform };
            build_rect(side, sigma2, mode)
        }
        SchemeTag::Polar | SchemeTag::PolarUniform => {
            let mode = if tag == SchemeTag::Polar { ProductMode::Optimal } else { ProductMode::Uniform };
            Ok(build_polar(n, sigma2, mode, config.lloydmax.grid)?.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub schemes: Vec<SchemeTag>,
    pub ns: Vec<usize>,
    pub sigma2: f64,
    /// Monte Carlo seed; LBG trains on `seed + 1` so its evaluation is held out.
    pub seed: u64,
    pub samples: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() {
            return Err(Error::Domain("sweep needs at least one scheme".into()));
        }
        if self.ns.is_empty() || self.ns.contains(&0) {
            return Err(Error::Domain("sweep needs a nonempty list of N >= 1".into()));
        }
        SourceModel::new(self.sigma2)?;
        Ok(())
    }
}

/// One `(scheme, N)` entry. Measurement fields are `None` when the entry failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scheme: SchemeTag,
    #[serde(rename = "N")]
    pub n: usize,
    pub rate_bits: f64,
    pub mse: Option<f64>,
    pub mse_db: Option<f64>,
    pub ci_halfwidth: Option<f64>,
    pub seed: u64,
    /// High-rate distortion at this N.
    pub d_hr: f64,
    /// Rate the high-rate formula assigns to the measured distortion.
    pub r_hr: Option<f64>,
    /// Entropy-coded high-rate rate at the measured distortion.
    pub r_echr: Option<f64>,
    /// Rate-distortion bound at `rate_bits`.
    pub d_rd: f64,
    pub error: Option<String>,
}

fn sweep_entry(tag: SchemeTag, n: usize, spec: &SweepSpec, design: &DesignConfig) -> SweepRow {
    let mut row = SweepRow {
        scheme: tag,
        n,
        rate_bits: (n as f64).log2(),
        mse: None,
        mse_db: None,
        ci_halfwidth: None,
        seed: spec.seed,
        d_hr: analytic_distortion_hr(n, spec.sigma2),
        r_hr: None,
        r_echr: None,
        d_rd: rd_distortion((n as f64).log2(), spec.sigma2),
        error: None,
    };
    let measured = (|| {
        let source = SourceModel::new(spec.sigma2)?;
        let cb = build_scheme(tag, n, spec.sigma2, design)?;
        mc_distortion(&cb, &source, spec.samples, spec.seed)
    })();
    match measured {
        Ok(r) => {
            row.mse = Some(r.mse);
            row.mse_db = Some(r.mse_db);
            row.ci_halfwidth = Some(r.ci_halfwidth);
            row.r_hr = analytic_rate_hr(r.mse, spec.sigma2).ok();
            row.r_echr = analytic_rate_echr(r.mse, spec.sigma2).ok();
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// One row per `(scheme, N)`, ordered by scheme then N; failing entries become
/// rows with an error tag instead of aborting the sweep.
pub fn run_sweep(spec: &SweepSpec, design: &DesignConfig) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut schemes = spec.schemes.clone();
    schemes.sort();
    schemes.dedup();
    let mut ns = spec.ns.clone();
    ns.sort_unstable();
    ns.dedup();
    let mut design = design.clone();
    design.lbg_seed = spec.seed.wrapping_add(1);
    Ok(schemes
        .iter()
        .flat_map(|&t| ns.iter().map(move |&n| (t, n)))
        .map(|(t, n)| sweep_entry(t, n, spec, &design))
        .collect())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

/// CSV text. `comment` (typically the effective configuration) goes on a leading
/// `#` line when present.
pub fn sweep_csv(rows: &[SweepRow], comment: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(c) = comment {
        let _ = writeln!(out, "# {c}");
    }
    out.push_str("scheme,N,rate_bits,mse,mse_db,ci_halfwidth,seed,d_hr,r_hr,r_echr,d_rd,error\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.16e},{},{},{},{},{:.16e},{},{},{:.16e},{}",
            r.scheme,
            r.n,
            r.rate_bits,
            opt(r.mse),
            opt(r.mse_db),
            opt(r.ci_halfwidth),
            r.seed,
            r.d_hr,
            opt(r.r_hr),
            opt(r.r_echr),
            r.d_rd,
            r.error.as_deref().map(csv_field).unwrap_or_default(),
        );
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub scheme: SchemeTag,
    #[serde(rename = "N")]
    pub size: usize,
    /// 1-based centroid index.
    pub n: usize,
    pub n_over_n: f64,
    pub magnitude: f64,
}

/// Centroid magnitudes against `n / N` for each size, golden schemes only.
pub fn magnitude_profile(tag: SchemeTag, sizes: &[usize], sigma2: f64, design: &DesignConfig) -> Result<Vec<ProfileRow>> {
    if !tag.is_golden() {
        return Err(Error::InvalidScheme(format!(
            "{tag} (magnitude profiles exist for highrate and lloydmax only)"
        )));
    }
    let mut rows = Vec::new();
    for &size in sizes {
        let cb = build_scheme(tag, size, sigma2, design)?;
        rows.extend(cb.radii().into_iter().enumerate().map(|(i, r)| ProfileRow {
            scheme: tag,
            size,
            n: i + 1,
            n_over_n: (i + 1) as f64 / size as f64,
            magnitude: r,
        }));
    }
    Ok(rows)
}

pub fn profile_csv(rows: &[ProfileRow], comment: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(c) = comment {
        let _ = writeln!(out, "# {c}");
    }
    out.push_str("scheme,N,n,n_over_N,magnitude\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{:.16e},{:.16e}", r.scheme, r.size, r.n, r.n_over_n, r.magnitude);
    }
    out
}

/// Largest `|r_a(n) - r_b(n)|` over two equal-length profiles.
pub fn max_profile_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
