//! Polar product quantizers: `N_mag` magnitude rings times `N_phase` uniform phases.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::rect::{ProductMode, SCALAR_MAX_ITER, SCALAR_TOL};
use super::scalar::{lloyd_shrunk, Density};
use crate::codebook::{Codebook, Scheme};
use crate::error::Result;
use crate::grid::{total_sq_err, QuadratureGrid};
use crate::source::SourceModel;
use crate::Complex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolarAllocation {
    pub n_mag: usize,
    pub n_phase: usize,
}

/// All `(N_mag, N_phase)` with `N_mag * N_phase = n`, by increasing `N_mag`.
pub fn allocations(n: usize) -> Vec<PolarAllocation> {
    (1..=n)
        .filter(|d| n % d == 0)
        .map(|d| PolarAllocation { n_mag: d, n_phase: n / d })
        .collect()
}

/// Ring radii for one allocation.
///
/// `Optimal` solves the magnitude Lloyd-Max problem for the polar partition: with
/// `P` phase sectors the best reproduction of a ring is `sinc(pi / P) E[r | ring]`
/// and the ring thresholds move to `(r_j + r_{j+1}) / (2 sinc(pi / P))`. A single
/// phase uses plain conditional means so the rings stay distinct.
/// `Uniform` uses equal-probability rings with conditional-mean radii.
pub fn ring_radii(alloc: PolarAllocation, sigma2: f64, mode: ProductMode) -> Result<Vec<f64>> {
    let density = Density::Rayleigh { sigma2 };
    match mode {
        ProductMode::Optimal => {
            let kappa = if alloc.n_phase == 1 {
                1.0
            } else {
                let x = PI / alloc.n_phase as f64;
                x.sin() / x
            };
            Ok(lloyd_shrunk(density, alloc.n_mag, kappa, SCALAR_TOL, SCALAR_MAX_ITER)?.levels)
        }
        ProductMode::Uniform => {
            let m = alloc.n_mag;
            let edges: Vec<f64> = (0..=m)
                .map(|k| if k == m { f64::INFINITY } else { density.quantile(k as f64 / m as f64) })
                .collect();
            Ok((0..m)
                .map(|j| {
                    let (m0, m1, _) = density.partial_moments(edges[j], edges[j + 1]);
                    m1 / m0
                })
                .collect())
        }
    }
}

/// Codebook for one allocation, ring-major, phase offset 0 on every ring.
pub fn polar_codebook(alloc: PolarAllocation, sigma2: f64, mode: ProductMode) -> Result<Codebook> {
    let radii = ring_radii(alloc, sigma2, mode)?;
    let centroids = radii
        .iter()
        .flat_map(|&r| {
            (0..alloc.n_phase).map(move |k| Complex::from_polar(r, TAU * k as f64 / alloc.n_phase as f64))
        })
        .collect();
    Ok(Codebook::new(Scheme::PolarProduct, sigma2, centroids)?
        .with_meta("mode", mode.as_str())
        .with_meta("n_mag", alloc.n_mag)
        .with_meta("n_phase", alloc.n_phase))
}

/// Searches every divisor pair of `n` and keeps the one with the smallest grid MSE
/// (nearest-centroid partition).
pub fn build_polar(
    n: usize,
    sigma2: f64,
    mode: ProductMode,
    grid: Option<QuadratureGrid>,
) -> Result<(Codebook, PolarAllocation)> {
    let source = SourceModel::new(sigma2)?;
    let grid = match grid {
        Some(g) => g,
        None => QuadratureGrid::for_source(&source, crate::grid::DEFAULT_RESOLUTION)?,
    };
    let mut best: Option<(f64, Codebook, PolarAllocation)> = None;
    for alloc in allocations(n) {
        let cb = polar_codebook(alloc, sigma2, mode)?;
        let mse = total_sq_err(&grid.cell_moments(cb.centroids(), &source));
        if best.as_ref().is_none_or(|(b, _, _)| mse < *b) {
            best = Some((mse, cb, alloc));
        }
    }
    let (mse, cb, alloc) = best.ok_or(crate::Error::EmptyCodebook)?;
    Ok((cb.with_meta("grid_mse", mse), alloc))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divisor_pairs() {
        let a = allocations(257);
        assert_eq!(a.len(), 2);
        assert_eq!(a[0], PolarAllocation { n_mag: 1, n_phase: 257 });
        assert_eq!(a[1], PolarAllocation { n_mag: 257, n_phase: 1 });
        assert_eq!(allocations(256).len(), 9);
        assert!(allocations(12).iter().all(|p| p.n_mag * p.n_phase == 12));
    }

    #[test]
    fn single_ring_layout() {
        let cb = polar_codebook(PolarAllocation { n_mag: 1, n_phase: 8 }, 1.0, ProductMode::Optimal).unwrap();
        let r = cb.radii();
        assert!(r.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-15));
        // sinc(pi/8) * E[r]
        let want = (PI / 8.0).sin() / (PI / 8.0) * 0.5 * PI.sqrt();
        assert!((r[0] - want).abs() < 1e-12);
    }

    #[test]
    fn one_ring_mse_bounded_by_magnitude_variance() {
        // all centroids on one ring: error at least the magnitude spread
        let s = SourceModel::unit();
        let g = QuadratureGrid::for_source(&s, 512).unwrap();
        let var_r = 1.0 - PI / 4.0;
        for p in [1usize, 4, 16] {
            let cb = polar_codebook(PolarAllocation { n_mag: 1, n_phase: p }, 1.0, ProductMode::Optimal).unwrap();
            let mse = total_sq_err(&g.cell_moments(cb.centroids(), &s));
            assert!(mse >= var_r - 1e-6, "{p}: {mse}");
        }
    }

    #[test]
    fn allocation_search_returns_best() {
        let s = SourceModel::unit();
        let g = QuadratureGrid::for_source(&s, 256).unwrap();
        let (cb, alloc) = build_polar(16, 1.0, ProductMode::Optimal, Some(g)).unwrap();
        assert_eq!(alloc.n_mag * alloc.n_phase, 16);
        let best = cb.metadata()["grid_mse"].as_f64().unwrap();
        for a in allocations(16) {
            let other = polar_codebook(a, 1.0, ProductMode::Optimal).unwrap();
            assert!(total_sq_err(&g.cell_moments(other.centroids(), &s)) >= best);
        }
    }
}
