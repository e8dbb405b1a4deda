//! Monte Carlo and grid-quadrature evaluation of any codebook.

pub mod voronoi;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codebook::{Codebook, Metadata, Scheme};
use crate::error::{Error, Result};
use crate::grid::{total_sq_err, QuadratureGrid};
use crate::highrate::{entropy_bits, rd_distortion};
use crate::source::{SourceModel, SAMPLE_CHUNK};

pub const MIN_MC_SAMPLES: usize = 10_000;

/// z for a two-sided 95% normal interval.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MonteCarlo,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub scheme: Scheme,
    #[serde(rename = "N")]
    pub n: usize,
    /// Source variance the codebook was evaluated against.
    pub sigma2: f64,
    pub mse: f64,
    /// `10 log10(mse / sigma2)`
    pub mse_db: f64,
    pub rate_bits: f64,
    pub samples_used: u64,
    /// Half-width of the 95% interval on `mse`; zero for grid estimates.
    pub ci_halfwidth: f64,
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub per_cell: Option<Vec<CellStats>>,
    #[serde(default)]
    pub metadata: Metadata,
}

impl DistortionReport {
    fn new(codebook: &Codebook, sigma2: f64, mse: f64, samples_used: u64, ci_halfwidth: f64, method: Method) -> Self {
        DistortionReport {
            scheme: codebook.scheme(),
            n: codebook.len(),
            sigma2,
            mse,
            mse_db: 10.0 * (mse / sigma2).log10(),
            rate_bits: codebook.rate_bits(),
            samples_used,
            ci_halfwidth,
            method,
            seed: None,
            per_cell: None,
            metadata: Metadata::new(),
        }
    }
}

/// Per-cell grid statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellStats {
    /// 1-based centroid index.
    pub index: usize,
    pub probability: f64,
    /// `E[|X - c|^2 | X in cell]`
    pub conditional_mse: f64,
    /// Cell area within the evaluation square.
    pub volume: f64,
    /// Normalized moment of inertia `(1/2) V^-2 int_cell |x - c|^2 dx`.
    pub nmi: f64,
    /// The cell reaches the edge of the evaluation square, so `volume` and `nmi`
    /// describe the clipped cell.
    pub clipped: bool,
}

/// Per-cell sample counts plus the error sums of one seeded Monte Carlo pass.
struct McTotals {
    counts: Vec<u64>,
    sum: f64,
    sum_sq: f64,
}

fn mc_pass(codebook: &Codebook, source: &SourceModel, num_samples: usize, seed: u64) -> McTotals {
    let index = codebook.index();
    let n = codebook.len();
    let parts: Vec<McTotals> = (0..num_samples.div_ceil(SAMPLE_CHUNK))
        .into_par_iter()
        .map(|k| {
            let len = SAMPLE_CHUNK.min(num_samples - k * SAMPLE_CHUNK);
            let mut rng = SourceModel::stream_rng(seed, k as u64);
            let mut t = McTotals { counts: vec![0; n], sum: 0.0, sum_sq: 0.0 };
            for _ in 0..len {
                let (slot, d2) = index.nearest_with_dist(source.draw(&mut rng));
                t.counts[slot] += 1;
                t.sum += d2;
                t.sum_sq += d2 * d2;
            }
            t
        })
        .collect();
    let mut total = McTotals { counts: vec![0; n], sum: 0.0, sum_sq: 0.0 };
    for p in parts {
        for (a, b) in total.counts.iter_mut().zip(&p.counts) {
            *a += b;
        }
        total.sum += p.sum;
        total.sum_sq += p.sum_sq;
    }
    total
}

/// Monte Carlo MSE over `num_samples` seeded draws; the draws are the same as
/// [`SourceModel::sample`] with the same seed.
pub fn mc_distortion(
    codebook: &Codebook,
    source: &SourceModel,
    num_samples: usize,
    seed: u64,
) -> Result<DistortionReport> {
    if num_samples < MIN_MC_SAMPLES {
        return Err(Error::Domain(format!(
            "Monte Carlo needs at least {MIN_MC_SAMPLES} samples, got {num_samples}"
        )));
    }
    let t = mc_pass(codebook, source, num_samples, seed);
    let m = num_samples as f64;
    let mse = t.sum / m;
    let var = ((t.sum_sq / m - mse * mse) * m / (m - 1.0)).max(0.0);
    let mut report = DistortionReport::new(codebook, source.sigma2(), mse, num_samples as u64, Z95 * (var / m).sqrt(), Method::MonteCarlo);
    report.seed = Some(seed);
    Ok(report)
}

fn grid_cells(codebook: &Codebook, source: &SourceModel, grid: &QuadratureGrid) -> Result<Vec<crate::grid::CellMoments>> {
    grid.check(source, codebook.len())?;
    let cells = grid.cell_moments(codebook.centroids(), source);
    if let Some(i) = cells.iter().position(|c| c.points == 0) {
        return Err(Error::GridTooCoarse { index: i + 1 });
    }
    Ok(cells)
}

/// Grid-quadrature MSE alone.
pub fn lm_grid_mse(codebook: &Codebook, source: &SourceModel, grid: &QuadratureGrid) -> Result<f64> {
    Ok(total_sq_err(&grid_cells(codebook, source, grid)?))
}

/// Grid-quadrature MSE with per-cell statistics attached.
pub fn grid_distortion(codebook: &Codebook, source: &SourceModel, grid: &QuadratureGrid) -> Result<DistortionReport> {
    let cells = grid_cells(codebook, source, grid)?;
    let m = grid.resolution() as u64;
    let mut report = DistortionReport::new(codebook, source.sigma2(), total_sq_err(&cells), m * m, 0.0, Method::Grid);
    report.per_cell = Some(stats_from_moments(&cells));
    report.metadata.insert("grid_m".into(), grid.resolution().into());
    report.metadata.insert("grid_extent".into(), grid.extent().into());
    Ok(report)
}

fn stats_from_moments(cells: &[crate::grid::CellMoments]) -> Vec<CellStats> {
    cells
        .iter()
        .enumerate()
        .map(|(i, c)| CellStats {
            index: i + 1,
            probability: c.mass,
            conditional_mse: if c.mass > 0.0 { c.sq_err / c.mass } else { 0.0 },
            volume: c.area,
            nmi: if c.area > 0.0 { 0.5 * c.moment / (c.area * c.area) } else { 0.0 },
            clipped: c.clipped,
        })
        .collect()
}

/// Per-cell probability, conditional MSE, area and normalized moment of inertia.
pub fn cell_statistics(codebook: &Codebook, source: &SourceModel, grid: &QuadratureGrid) -> Result<Vec<CellStats>> {
    Ok(stats_from_moments(&grid_cells(codebook, source, grid)?))
}

/// CSV with columns `index,probability,conditional_mse,volume,nmi,clipped`.
pub fn cell_stats_csv(stats: &[CellStats]) -> String {
    let mut out = String::from("index,probability,conditional_mse,volume,nmi,clipped\n");
    for s in stats {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
            s.index, s.probability, s.conditional_mse, s.volume, s.nmi, s.clipped
        ));
    }
    out
}

/// Entropy in bits of the empirical cell frequencies over `num_samples` seeded draws.
pub fn empirical_entropy(codebook: &Codebook, source: &SourceModel, num_samples: usize, seed: u64) -> Result<f64> {
    let need = 100 * codebook.len();
    if num_samples < need {
        return Err(Error::Domain(format!(
            "empirical entropy needs at least {need} samples for N = {}, got {num_samples}",
            codebook.len()
        )));
    }
    let t = mc_pass(codebook, source, num_samples, seed);
    let p: Vec<f64> = t.counts.iter().map(|&c| c as f64 / num_samples as f64).collect();
    Ok(entropy_bits(&p))
}

/// Peak-to-average power ratio in dB, `10 log10(max |x|^2 / sum w |x|^2)`, with
/// uniform weights unless `weights` is given.
pub fn papr(codebook: &Codebook, weights: Option<&[f64]>) -> Result<f64> {
    let power: Vec<f64> = codebook.centroids().iter().map(|c| c.norm_sqr()).collect();
    let mean = match weights {
        None => power.iter().sum::<f64>() / power.len() as f64,
        Some(w) => {
            if w.len() != power.len() {
                return Err(Error::Domain(format!("{} weights for {} centroids", w.len(), power.len())));
            }
            if w.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
                return Err(Error::Domain("weights must be finite and nonnegative".into()));
            }
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::Domain(format!("weights sum to {total}, not 1")));
            }
            w.iter().zip(&power).map(|(a, b)| a * b).sum()
        }
    };
    let peak = power.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 || mean <= 0.0 {
        return Err(Error::ZeroPower);
    }
    Ok(10.0 * (peak / mean).log10())
}

/// `(R, sigma2 2^-R)` for each rate.
pub fn rd_reference(sigma2: f64, rates: &[f64]) -> Result<Vec<(f64, f64)>> {
    SourceModel::new(sigma2)?;
    rates
        .iter()
        .map(|&r| {
            if r >= 0.0 && r.is_finite() {
                Ok((r, rd_distortion(r, sigma2)))
            } else {
                Err(Error::Domain(format!("rate must be finite and nonnegative, got {r}")))
            }
        })
        .collect()
}
