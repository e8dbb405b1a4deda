//! Rectangular product quantizers: the same scalar quantizer on both axes.

use serde::{Deserialize, Serialize};

use super::scalar::{lloyd_scalar, optimal_uniform, Density, ScalarQuantizer};
use crate::codebook::{Codebook, Scheme};
use crate::error::{Error, Result};
use crate::Complex;

pub const SCALAR_TOL: f64 = 1e-13;
pub const SCALAR_MAX_ITER: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ProductMode {
    Uniform,
    #[default]
    Optimal,
}

impl ProductMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ProductMode::Uniform => "Uniform",
            ProductMode::Optimal => "Optimal",
        }
    }
}

/// Scalar quantizer used on each axis of a rectangular quantizer.
pub fn rect_axis(per_dim: usize, sigma2: f64, mode: ProductMode) -> Result<ScalarQuantizer> {
    let density = Density::GaussianPerDim { var: sigma2 / 2.0 };
    match mode {
        ProductMode::Optimal => lloyd_scalar(density, per_dim, SCALAR_TOL, SCALAR_MAX_ITER),
        ProductMode::Uniform => optimal_uniform(density, per_dim),
    }
}

/// `per_dim^2` centroids on the product of two identical scalar quantizers,
/// row-major in (imaginary, real).
pub fn build_rect(per_dim: usize, sigma2: f64, mode: ProductMode) -> Result<Codebook> {
    if per_dim == 0 {
        return Err(Error::InvalidN {
            scheme: "rect",
            n: 0,
            reason: "need at least one level per dimension".into(),
        });
    }
    let axis = rect_axis(per_dim, sigma2, mode)?;
    let centroids = axis
        .levels
        .iter()
        .flat_map(|&im| axis.levels.iter().map(move |&re| Complex::new(re, im)))
        .collect();
    Ok(Codebook::new(Scheme::RectProduct, sigma2, centroids)?
        .with_meta("mode", mode.as_str())
        .with_meta("levels_per_dim", per_dim)
        .with_meta("analytic_mse", 2.0 * axis.mse()))
}

/// Levels per dimension for a total of `n` centroids, if `n` is a perfect square.
pub fn square_side(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n && r > 0).then_some(r)
}
