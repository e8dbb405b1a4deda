//! Lloyd-Max optimization of golden-quantizer radii with the angles held at
//! `2 pi phi n`.
//!
//! Each iteration partitions the quadrature grid into the Voronoi cells of the
//! current codebook and replaces every radius by
//!
//! ```text
//! r_n = sum_cell (x cos phi_n + y sin phi_n) f(x, y) / sum_cell f(x, y)
//! ```
//!
//! which is the exact minimizer of the grid MSE over `r_n` for the fixed partition.
//! With the growing-spiral constraint the radii are then projected onto the
//! nondecreasing cone (weighted by cell mass), which keeps the update a descent step.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::codebook::{spiral_angle, spiral_centroids, Codebook, Scheme};
use crate::error::{Error, Result};
use crate::grid::{total_sq_err, QuadratureGrid, DEFAULT_RESOLUTION};
use crate::highrate::{highrate_radius, RadiusConvention};
use crate::source::SourceModel;

pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_ITER: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Init {
    /// High-rate radii (midpoint convention).
    #[default]
    HighRate,
    /// Equal source-mass rings: `r_n = sigma sqrt(-ln(1 - (n - 1/2)/N))`.
    Uniform,
}

impl Init {
    pub fn as_str(self) -> &'static str {
        match self {
            Init::HighRate => "HighRate",
            Init::Uniform => "Uniform",
        }
    }

    pub fn radii(self, n: usize, sigma2: f64) -> Result<Vec<f64>> {
        match self {
            Init::HighRate => (1..=n)
                .map(|k| highrate_radius(n, k, sigma2, RadiusConvention::Midpoint))
                .collect(),
            Init::Uniform => Ok((1..=n)
                .map(|k| {
                    let q = (k as f64 - 0.5) / n as f64;
                    (-sigma2 * (-q).ln_1p()).sqrt()
                })
                .collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LloydMaxConfig {
    pub init: Init,
    pub monotone: bool,
    pub tol: f64,
    pub max_iter: usize,
    /// `None` picks `4.5 sigma` half-width with `DEFAULT_RESOLUTION` points per axis.
    pub grid: Option<QuadratureGrid>,
}

impl Default for LloydMaxConfig {
    fn default() -> Self {
        LloydMaxConfig {
            init: Init::HighRate,
            monotone: false,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            grid: None,
        }
    }
}

/// Optimizer state after `iteration` updates.
///
/// `distortion_trace[k]` is the grid MSE of the radii after `k` updates, so the
/// trace trails the radii by one entry until [`optimize_lloydmax`] closes it.
#[derive(Debug, Clone, PartialEq)]
pub struct LloydMaxState {
    pub radii: Vec<f64>,
    pub iteration: usize,
    pub distortion_trace: Vec<f64>,
    /// `max_n |r_n^(k+1) - r_n^(k)|` for every update `k`.
    pub radius_change: Vec<f64>,
    pub converged: bool,
    pub monotone_constraint: bool,
}

impl LloydMaxState {
    pub fn new(radii: Vec<f64>, monotone_constraint: bool) -> Self {
        LloydMaxState {
            radii,
            iteration: 0,
            distortion_trace: Vec::new(),
            radius_change: Vec::new(),
            converged: false,
            monotone_constraint,
        }
    }

    pub fn codebook(&self, sigma2: f64) -> Result<Codebook> {
        spiral_centroids(&self.radii, Scheme::LloydMaxGQ, sigma2)
    }

    /// CSV with columns `iteration,distortion,max_radius_change`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("iteration,distortion,max_radius_change\n");
        for (k, d) in self.distortion_trace.iter().enumerate() {
            let change = self.radius_change.get(k).copied().unwrap_or(0.0);
            let _ = writeln!(out, "{k},{d:.17e},{change:.17e}");
        }
        out
    }
}

/// Grid MSE of `codebook` under the source.
pub fn lm_objective(codebook: &Codebook, source: &SourceModel, grid: &QuadratureGrid) -> Result<f64> {
    grid.check(source, codebook.len())?;
    let cells = grid.cell_moments(codebook.centroids(), source);
    if let Some(i) = cells.iter().position(|c| c.points == 0) {
        return Err(Error::GridTooCoarse { index: i + 1 });
    }
    Ok(total_sq_err(&cells))
}

/// One Lloyd-Max step on the radii.
pub fn lm_update(state: &LloydMaxState, source: &SourceModel, grid: &QuadratureGrid) -> Result<LloydMaxState> {
    let codebook = state.codebook(source.sigma2())?;
    let cells = grid.cell_moments(codebook.centroids(), source);
    if let Some(i) = cells.iter().position(|c| c.points == 0 || !(c.mass > 0.0)) {
        return Err(Error::EmptyCell {
            index: i + 1,
            iteration: state.iteration,
        });
    }

    let mut next = state.clone();
    if next.distortion_trace.len() == state.iteration {
        next.distortion_trace.push(total_sq_err(&cells));
    }

    let mut radii: Vec<f64> = cells
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let (s, co) = spiral_angle(i + 1).sin_cos();
            (co * c.sum_x + s * c.sum_y) / c.mass
        })
        .collect();
    if state.monotone_constraint {
        let weights: Vec<f64> = cells.iter().map(|c| c.mass).collect();
        radii = isotonic_nondecreasing(&radii, &weights);
    }
    // a negative radius would flip the centroid off its golden angle
    for r in &mut radii {
        *r = r.max(0.0);
    }

    let change = radii
        .iter()
        .zip(&state.radii)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    next.radius_change.push(change);
    next.radii = radii;
    next.iteration += 1;
    Ok(next)
}

/// Runs [`lm_update`] until the relative distortion change falls below `tol` or
/// `max_iter` updates have been made.
pub fn optimize_lloydmax(n: usize, sigma2: f64, config: &LloydMaxConfig) -> Result<(Codebook, LloydMaxState)> {
    if n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    let source = SourceModel::new(sigma2)?;
    let grid = match config.grid {
        Some(g) => g,
        None => QuadratureGrid::for_source(&source, DEFAULT_RESOLUTION)?,
    };
    grid.check(&source, n)?;

    let mut state = LloydMaxState::new(config.init.radii(n, sigma2)?, config.monotone);
    if config.monotone {
        state.radii = isotonic_nondecreasing(&state.radii, &vec![1.0; n]);
    }
    while state.iteration < config.max_iter {
        state = lm_update(&state, &source, &grid)?;
        let t = &state.distortion_trace;
        if t.len() >= 2 {
            let (prev, cur) = (t[t.len() - 2], t[t.len() - 1]);
            if (prev - cur).abs() <= config.tol * cur.abs() {
                state.converged = true;
                break;
            }
        }
    }
    let codebook = state.codebook(sigma2)?;
    let final_d = lm_objective(&codebook, &source, &grid)?;
    state.distortion_trace.push(final_d);

    let codebook = codebook
        .with_meta("iterations", state.iteration)
        .with_meta("final_distortion", final_d)
        .with_meta("converged", state.converged)
        .with_meta("monotone", config.monotone)
        .with_meta("init", config.init.as_str())
        .with_meta("tol", config.tol)
        .with_meta("max_iter", config.max_iter)
        .with_meta("grid_m", grid.resolution())
        .with_meta("grid_extent", grid.extent());
    Ok((codebook, state))
}

/// Weighted least-squares projection onto nondecreasing sequences
/// (pool-adjacent-violators).
pub fn isotonic_nondecreasing(values: &[f64], weights: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), weights.len());
    // blocks of (mean, weight, len)
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() >= 2 {
            let (m2, w2, l2) = blocks[blocks.len() - 1];
            let (m1, w1, l1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            let wt = w1 + w2;
            let mean = if wt > 0.0 { (m1 * w1 + m2 * w2) / wt } else { 0.5 * (m1 + m2) };
            *blocks.last_mut().unwrap() = (mean, wt, l1 + l2);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(m, _, l)| std::iter::repeat_n(m, l))
        .collect()
}
