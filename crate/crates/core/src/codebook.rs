//! Codebook data model, the golden-angle centroid law and nearest-centroid quantization.
//!
//! Centroid indices are 1-based (`n = 1..=N`) at every public boundary. Internally
//! the centroid vector is 0-based, so centroid `n` lives at `centroids[n - 1]`.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{nearest_linear, NearestIndex};
use crate::Complex;

/// Fraction of a turn between consecutive spiral centroids, `(3 - sqrt 5) / 2`.
pub fn golden_fraction() -> f64 {
    (3.0 - 5f64.sqrt()) / 2.0
}

/// The golden angle in radians, `2 pi (3 - sqrt 5) / 2 ~= 2.39996`.
pub fn golden_angle() -> f64 {
    TAU * golden_fraction()
}

/// Angle of centroid `n`, reduced to `[0, 2 pi)`.
///
/// `n * phi` is formed as an exact two-term product before taking the fractional
/// part, so the reduced angle stays accurate to a few ulps for any `n`.
pub fn spiral_angle(n: usize) -> f64 {
    spiral_angle_with(golden_fraction(), n)
}

pub(crate) fn spiral_angle_with(turns: f64, n: usize) -> f64 {
    let nf = n as f64;
    let hi = nf * turns;
    let lo = nf.mul_add(turns, -hi);
    let mut frac = (hi - hi.floor()) + lo;
    frac -= frac.floor();
    TAU * frac
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scheme {
    HighRateGQ,
    LloydMaxGQ,
    RectProduct,
    PolarProduct,
    LBG,
}

impl Scheme {
    pub fn is_golden(self) -> bool {
        matches!(self, Scheme::HighRateGQ | Scheme::LloydMaxGQ)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::HighRateGQ => "HighRateGQ",
            Scheme::LloydMaxGQ => "LloydMaxGQ",
            Scheme::RectProduct => "RectProduct",
            Scheme::PolarProduct => "PolarProduct",
            Scheme::LBG => "LBG",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "HighRateGQ" => Scheme::HighRateGQ,
            "LloydMaxGQ" => Scheme::LloydMaxGQ,
            "RectProduct" => Scheme::RectProduct,
            "PolarProduct" => Scheme::PolarProduct,
            "LBG" => Scheme::LBG,
            other => return Err(format!("unknown scheme `{other}`")),
        })
    }
}

pub type Metadata = BTreeMap<String, serde_json::Value>;

/// An ordered set of complex reproduction points plus scheme metadata.
///
/// Immutable once built apart from the free-form metadata map.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    scheme: Scheme,
    sigma2: f64,
    centroids: Vec<Complex>,
    metadata: Metadata,
}

impl Codebook {
    pub fn new(scheme: Scheme, sigma2: f64, centroids: Vec<Complex>) -> Result<Self> {
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::InvalidVariance(sigma2));
        }
        if centroids.is_empty() {
            return Err(Error::EmptyCodebook);
        }
        if let Some(i) = centroids.iter().position(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFiniteCentroid { index: i + 1 });
        }
        Ok(Codebook {
            scheme,
            sigma2,
            centroids,
            metadata: Metadata::new(),
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Number of centroids `N`.
    pub fn len(&self) -> usize {
        self.centroids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centroids.is_empty()
    }

    pub fn centroids(&self) -> &[Complex] {
        &self.centroids
    }

    /// Centroid `n`, 1-based.
    pub fn centroid(&self, n: usize) -> Result<Complex> {
        if n == 0 || n > self.len() {
            return Err(Error::IndexOutOfRange { n, size: self.len() });
        }
        Ok(self.centroids[n - 1])
    }

    pub fn radii(&self) -> Vec<f64> {
        self.centroids.iter().map(|c| c.norm()).collect()
    }

    /// Fixed-rate `log2 N`.
    pub fn rate_bits(&self) -> f64 {
        (self.len() as f64).log2()
    }

    pub fn metadata(&self) -> &Metadata {
        &self.metadata
    }

    pub fn set_meta(&mut self, key: impl Into<String>, value: impl Into<serde_json::Value>) {
        self.metadata.insert(key.into(), value.into());
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl Into<serde_json::Value>) -> Self {
        self.set_meta(key, value);
        self
    }

    /// Copy of this codebook with every centroid multiplied by `factor` (a rotation
    /// and/or scaling). `sigma2` is left to the caller.
    pub fn transformed(&self, factor: Complex, sigma2: f64) -> Result<Codebook> {
        let mut cb = Codebook::new(
            self.scheme,
            sigma2,
            self.centroids.iter().map(|c| c * factor).collect(),
        )?;
        cb.metadata = self.metadata.clone();
        Ok(cb)
    }

    /// Nearest-centroid search structure for repeated queries.
    pub fn index(&self) -> NearestIndex {
        NearestIndex::new(&self.centroids)
    }

    /// Largest deviation of any centroid angle from the golden-angle law, in radians.
    /// Centroids at the origin carry no angle and are skipped.
    pub fn golden_angle_error(&self) -> f64 {
        self.centroids
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(i, c)| {
                let want = spiral_angle(i + 1);
                let got = c.arg().rem_euclid(TAU);
                let d = (got - want).rem_euclid(TAU);
                d.min(TAU - d)
            })
            .fold(0.0, f64::max)
    }
}

/// Places centroid `n` at `radii[n-1] * exp(i * 2 pi phi * n)`, `n = 1..=N`.
pub fn spiral_centroids(radii: &[f64], scheme: Scheme, sigma2: f64) -> Result<Codebook> {
    if radii.is_empty() {
        return Err(Error::EmptyCodebook);
    }
    for (i, &r) in radii.iter().enumerate() {
        if !r.is_finite() {
            return Err(Error::NonFiniteRadius { index: i + 1, value: r });
        }
        if r < 0.0 {
            return Err(Error::NegativeRadius { index: i + 1, value: r });
        }
    }
    let centroids = radii
        .iter()
        .enumerate()
        .map(|(i, &r)| Complex::from_polar(r, spiral_angle(i + 1)))
        .collect();
    Codebook::new(scheme, sigma2, centroids)
}

/// Index (1-based) of the centroid closest to `point`; the smallest index wins ties.
pub fn quantize(codebook: &Codebook, point: Complex) -> usize {
    nearest_linear(&codebook.centroids, point) + 1
}

/// Elementwise [`quantize`], accelerated by uniform-grid bucketing.
pub fn quantize_batch(codebook: &Codebook, points: &[Complex]) -> Vec<usize> {
    if points.is_empty() {
        return Vec::new();
    }
    let index = codebook.index();
    points.par_iter().map(|&p| index.nearest(p) + 1).collect()
}
