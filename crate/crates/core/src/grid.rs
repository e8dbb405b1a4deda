//! Deterministic midpoint-rule tensor grid used for every Voronoi-cell integral.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::NearestIndex;
use crate::source::SourceModel;
use crate::Complex;

/// Default half-width in units of sigma.
pub const DEFAULT_EXTENT_SIGMAS: f64 = 4.5;
pub const DEFAULT_RESOLUTION: usize = 2048;

/// Rows handled per work item. Fixed so that the reduction order never depends on
/// the number of threads.
const ROW_BLOCK: usize = 16;

/// `M x M` cell midpoints on `[-extent, extent]^2`, each weighted `(2 extent / M)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    extent: f64,
    resolution: usize,
}

impl QuadratureGrid {
    pub fn new(extent: f64, resolution: usize) -> Result<Self> {
        if !(extent.is_finite() && extent > 0.0) {
            return Err(Error::Domain(format!("grid extent must be positive, got {extent}")));
        }
        if resolution == 0 {
            return Err(Error::Domain("grid resolution must be positive".into()));
        }
        Ok(QuadratureGrid { extent, resolution })
    }

    /// Grid with half-width `DEFAULT_EXTENT_SIGMAS * sigma` and `resolution` points per axis.
    pub fn for_source(source: &SourceModel, resolution: usize) -> Result<Self> {
        Self::new(DEFAULT_EXTENT_SIGMAS * source.sigma(), resolution)
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn step(&self) -> f64 {
        2.0 * self.extent / self.resolution as f64
    }

    pub fn weight(&self) -> f64 {
        let h = self.step();
        h * h
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.extent + (i as f64 + 0.5) * self.step()
    }

    /// Smallest half-width that leaves less than 1e-8 of the source mass outside
    /// the inscribed disk.
    pub fn min_extent(source: &SourceModel) -> f64 {
        source.sigma() * 1e8f64.ln().sqrt()
    }

    pub fn min_resolution(n: usize) -> usize {
        4 * (n as f64).sqrt().ceil() as usize
    }

    /// Checks the coverage and resolution requirements for an `n`-cell codebook.
    pub fn check(&self, source: &SourceModel, n: usize) -> Result<()> {
        let need = Self::min_extent(source);
        if self.extent < need * (1.0 - 1e-12) {
            return Err(Error::Domain(format!(
                "grid extent {} below {need:.4} (1e-8 tail mass)",
                self.extent
            )));
        }
        let m = Self::min_resolution(n);
        if self.resolution < m {
            return Err(Error::Domain(format!(
                "grid resolution {} below {m} needed for N = {n}",
                self.resolution
            )));
        }
        Ok(())
    }

    /// Accumulates per-cell moments over the grid for the Voronoi partition of
    /// `centroids`. Deterministic for a given grid and codebook.
    pub fn cell_moments(&self, centroids: &[Complex], source: &SourceModel) -> Vec<CellMoments> {
        let m = self.resolution;
        let n = centroids.len();
        let index = NearestIndex::new(centroids);
        let coords: Vec<f64> = (0..m).map(|i| self.coord(i)).collect();
        let s2 = source.sigma2();
        let gauss: Vec<f64> = coords.iter().map(|&x| (-x * x / s2).exp()).collect();
        let w = self.weight();
        let scale = w / (PI * s2);
        // per step along a row every distance changes by at most h
        let h = self.step();
        let step_margin = 2.0 * h * (1.0 + 1e-9);
        let safety = 1e-9 * (h + self.extent);

        let blocks: Vec<Vec<CellMoments>> = (0..m.div_ceil(ROW_BLOCK))
            .into_par_iter()
            .map(|b| {
                let mut acc = vec![CellMoments::default(); n];
                for j in b * ROW_BLOCK..((b + 1) * ROW_BLOCK).min(m) {
                    let y = coords[j];
                    let gy = gauss[j] * scale;
                    let edge_row = j == 0 || j == m - 1;
                    // current winner and its guaranteed lead over every other centroid
                    let mut run = 0usize;
                    let mut lead = f64::NEG_INFINITY;
                    for i in 0..m {
                        let x = coords[i];
                        lead -= step_margin;
                        let (slot, d2) = if lead > safety {
                            let c = centroids[run];
                            (run, (x - c.re) * (x - c.re) + (y - c.im) * (y - c.im))
                        } else {
                            let (slot, d2, second) = index.nearest_two(Complex::new(x, y));
                            run = slot;
                            lead = second.sqrt() - d2.sqrt();
                            (slot, d2)
                        };
                        let wf = gy * gauss[i];
                        let c = &mut acc[slot];
                        c.mass += wf;
                        c.sum_x += wf * x;
                        c.sum_y += wf * y;
                        c.sq_err += wf * d2;
                        c.area += w;
                        c.moment += w * d2;
                        c.points += 1;
                        c.clipped |= edge_row || i == 0 || i == m - 1;
                    }
                }
                acc
            })
            .collect();

        let mut total = vec![CellMoments::default(); n];
        for block in &blocks {
            for (t, c) in total.iter_mut().zip(block) {
                t.merge(c);
            }
        }
        total
    }
}

/// Grid integrals over one Voronoi cell.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CellMoments {
    /// `sum w f`
    pub mass: f64,
    /// `sum w f x`
    pub sum_x: f64,
    /// `sum w f y`
    pub sum_y: f64,
    /// `sum w f |p - c|^2`
    pub sq_err: f64,
    /// `sum w`, the clipped cell area
    pub area: f64,
    /// `sum w |p - c|^2`, unweighted second moment about the centroid
    pub moment: f64,
    pub points: u64,
    /// The cell reaches the grid boundary.
    pub clipped: bool,
}

impl CellMoments {
    fn merge(&mut self, o: &CellMoments) {
        self.mass += o.mass;
        self.sum_x += o.sum_x;
        self.sum_y += o.sum_y;
        self.sq_err += o.sq_err;
        self.area += o.area;
        self.moment += o.moment;
        self.points += o.points;
        self.clipped |= o.clipped;
    }
}

/// Sum of `sq_err` over cells, i.e. the grid MSE.
pub fn total_sq_err(cells: &[CellMoments]) -> f64 {
    cells.iter().map(|c| c.sq_err).sum()
}
