//! Closed-form high-rate golden quantizer and its analytic distortion, rate and
//! entropy expressions.
//!
//! For the complex Gaussian the MSE-optimal point density is
//! `lambda(x, y) = N / (2 pi sigma2) * exp(-(x^2 + y^2) / (2 sigma2))`. Requiring `n`
//! centroids inside radius `r_n` gives `N (1 - exp(-r_n^2 / 2 sigma2)) = n`, i.e.
//! `r_n = sigma * sqrt(2 ln(N / (N - n)))`, which diverges at `n = N`.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::codebook::{spiral_centroids, Codebook, Scheme};
use crate::error::{Error, Result};

/// How the radius law is kept finite at the outermost index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RadiusConvention {
    /// Evaluate the law at `n - 1/2` for every index.
    #[default]
    Midpoint,
    /// The law verbatim for `n < N`; `n = N` is evaluated at `N - 1/2`.
    RawClampLast,
}

impl RadiusConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            RadiusConvention::Midpoint => "Midpoint",
            RadiusConvention::RawClampLast => "RawClampLast",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighRateDesign {
    pub n: usize,
    pub sigma2: f64,
    pub convention: RadiusConvention,
}

impl HighRateDesign {
    pub fn new(n: usize, sigma2: f64, convention: RadiusConvention) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("N must be at least 1".into()));
        }
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::InvalidVariance(sigma2));
        }
        Ok(HighRateDesign { n, sigma2, convention })
    }

    pub fn radii(&self) -> Result<Vec<f64>> {
        (1..=self.n)
            .map(|k| highrate_radius(self.n, k, self.sigma2, self.convention))
            .collect()
    }

    pub fn build(&self) -> Result<Codebook> {
        build_highrate(self.n, self.sigma2, self.convention)
    }
}

/// Radius of centroid `n` (1-based) in an `N`-point high-rate design.
pub fn highrate_radius(size: usize, n: usize, sigma2: f64, convention: RadiusConvention) -> Result<f64> {
    if n == 0 || n > size {
        return Err(Error::IndexOutOfRange { n, size });
    }
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::InvalidVariance(sigma2));
    }
    let big = size as f64;
    let inside = match convention {
        RadiusConvention::Midpoint => n as f64 - 0.5,
        RadiusConvention::RawClampLast if n == size => big - 0.5,
        RadiusConvention::RawClampLast => n as f64,
    };
    // ln(N / (N - m)) = -ln(1 - m/N)
    let log_ratio = -(-inside / big).ln_1p();
    Ok((sigma2 * 2.0 * log_ratio).sqrt())
}

pub fn build_highrate(size: usize, sigma2: f64, convention: RadiusConvention) -> Result<Codebook> {
    let design = HighRateDesign::new(size, sigma2, convention)?;
    let radii = design.radii()?;
    Ok(spiral_centroids(&radii, Scheme::HighRateGQ, sigma2)?
        .with_meta("radius_convention", convention.as_str()))
}

/// `D_hr = 2 pi sigma2 / (3 N)`.
pub fn analytic_distortion_hr(size: usize, sigma2: f64) -> f64 {
    2.0 * PI * sigma2 / (3.0 * size as f64)
}

fn check_distortion(d: f64, sigma2: f64) -> Result<()> {
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::Domain(format!("distortion must be positive, got {d}")));
    }
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(Error::InvalidVariance(sigma2));
    }
    Ok(())
}

/// `R_hr = log2(2 pi sigma2 / (3 D))`.
pub fn analytic_rate_hr(d: f64, sigma2: f64) -> Result<f64> {
    check_distortion(d, sigma2)?;
    Ok((2.0 * PI * sigma2 / (3.0 * d)).log2())
}

/// Shannon bound for the complex Gaussian, `R = log2(sigma2 / D)`.
pub fn rd_rate(d: f64, sigma2: f64) -> Result<f64> {
    check_distortion(d, sigma2)?;
    Ok((sigma2 / d).log2())
}

/// Inverse of [`rd_rate`]: `D = sigma2 * 2^-R`.
pub fn rd_distortion(rate: f64, sigma2: f64) -> f64 {
    sigma2 * (-rate).exp2()
}

/// `R_echr = log2(pi sqrt(e) sigma2 / (3 D))`.
pub fn analytic_rate_echr(d: f64, sigma2: f64) -> Result<f64> {
    check_distortion(d, sigma2)?;
    Ok((PI * E.sqrt() * sigma2 / (3.0 * d)).log2())
}

/// Large-`N` index entropy of the high-rate design, `log2 N - 1 + log2 sqrt(e)`.
pub fn analytic_entropy_echr(size: usize) -> Result<f64> {
    if size < 2 {
        return Err(Error::Domain(format!(
            "asymptotic entropy needs N >= 2, got {size}"
        )));
    }
    Ok((size as f64).log2() - 1.0 + E.sqrt().log2())
}

/// Approximate centroid probabilities of the high-rate design.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyModel {
    probabilities: Vec<f64>,
}

impl EntropyModel {
    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Probability of centroid `n` is `probabilities()[n - 1]`.
    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Exact `-sum p log2 p` of this finite model.
    pub fn entropy_bits(&self) -> f64 {
        entropy_bits(&self.probabilities)
    }
}

/// `p = 2 (N - m) / (N (N + 1))` for the 0-based `m = 0..N-1`, stored for the
/// 1-based centroid `n = m + 1`.
pub fn entropy_model(size: usize) -> Result<EntropyModel> {
    if size == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    let big = size as f64;
    let norm = big * (big + 1.0);
    let probabilities = (0..size).map(|m| 2.0 * (big - m as f64) / norm).collect();
    Ok(EntropyModel { probabilities })
}

/// `-sum p log2 p`, with `0 log 0 = 0`.
pub fn entropy_bits(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&q| q > 0.0)
        .map(|&q| -q * q.log2())
        .sum()
}
