//! Golden-angle spiral quantizers for the circularly-symmetric complex Gaussian.
//!
//! Centroid `n` of a golden quantizer sits at `r_n * exp(i 2 pi phi n)` with
//! `phi = (3 - sqrt 5) / 2`. This crate builds the closed-form high-rate design,
//! optimizes the radii with a constrained Lloyd-Max iteration, trains classical
//! baselines (rectangular, polar, LBG) and evaluates all of them by Monte Carlo
//! and grid quadrature.

pub mod baselines;
pub mod codebook;
pub mod error;
pub mod eval;
pub mod grid;
pub mod highrate;
pub mod io;
pub mod lloydmax;
pub mod nn;
pub mod source;
pub mod sweep;

pub type Complex = num_complex::Complex64;

pub use codebook::{
    golden_angle, golden_fraction, quantize, quantize_batch, spiral_angle, spiral_centroids, Codebook,
    Scheme,
};
pub use error::{Error, Result};
pub use grid::QuadratureGrid;
pub use highrate::{build_highrate, RadiusConvention};
pub use io::{load_codebook, save_codebook};
pub use lloydmax::{optimize_lloydmax, Init, LloydMaxConfig, LloydMaxState};
pub use source::SourceModel;
pub use eval::{cell_statistics, empirical_entropy, grid_distortion, mc_distortion, papr, rd_reference, CellStats, DistortionReport};
pub use sweep::{build_scheme, DesignConfig, SchemeTag};
