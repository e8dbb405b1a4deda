//! Circularly-symmetric complex Gaussian source.

use std::f64::consts::{PI, TAU};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::Complex;

/// Samples per generator stream. Stream `k` covers samples `k*CHUNK .. (k+1)*CHUNK`,
/// which makes every batch independent of how the work is split across threads.
pub const SAMPLE_CHUNK: usize = 1 << 16;

/// Complex Gaussian with total variance `sigma2` (`sigma2 / 2` per dimension).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceModel {
    sigma2: f64,
}

impl SourceModel {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(Error::InvalidVariance(sigma2));
        }
        Ok(SourceModel { sigma2 })
    }

    pub fn unit() -> Self {
        SourceModel { sigma2: 1.0 }
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    /// `f(x, y) = exp(-(x^2 + y^2) / sigma2) / (pi sigma2)`.
    pub fn pdf(&self, x: f64, y: f64) -> f64 {
        (-(x * x + y * y) / self.sigma2).exp() / (PI * self.sigma2)
    }

    /// Density of the magnitude, `f(r) = 2 r exp(-r^2 / sigma2) / sigma2`.
    pub fn radial_pdf(&self, r: f64) -> f64 {
        if r < 0.0 {
            return 0.0;
        }
        2.0 * r * (-r * r / self.sigma2).exp() / self.sigma2
    }

    /// Probability mass inside the disk of radius `r`.
    pub fn mass_within(&self, r: f64) -> f64 {
        -(-r * r / self.sigma2).exp_m1()
    }

    /// Generator for stream `stream` of the run keyed by `seed`.
    pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        rng
    }

    /// One draw: magnitude `sigma * sqrt(-ln U)`, phase uniform on `[0, 2 pi)`.
    #[inline]
    pub fn draw(&self, rng: &mut impl RngCore) -> Complex {
        // 53-bit uniforms; u in (0, 1] keeps ln finite
        let u = ((rng.next_u64() >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64);
        let v = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        Complex::from_polar(self.sigma() * (-u.ln()).sqrt(), TAU * v)
    }

    /// Fills one chunk `chunk` of the seeded sample sequence.
    pub fn sample_chunk(&self, seed: u64, chunk: usize, len: usize) -> Vec<Complex> {
        let mut rng = Self::stream_rng(seed, chunk as u64);
        (0..len).map(|_| self.draw(&mut rng)).collect()
    }

    /// `count` seeded samples; identical for every thread count.
    pub fn sample(&self, seed: u64, count: usize) -> Vec<Complex> {
        let chunks = count.div_ceil(SAMPLE_CHUNK);
        (0..chunks)
            .into_par_iter()
            .map(|k| {
                let len = SAMPLE_CHUNK.min(count - k * SAMPLE_CHUNK);
                self.sample_chunk(seed, k, len)
            })
            .collect::<Vec<_>>()
            .concat()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_variance() {
        assert!(SourceModel::new(0.0).is_err());
        assert!(SourceModel::new(-1.0).is_err());
        assert!(SourceModel::new(f64::NAN).is_err());
    }

    #[test]
    fn pdf_integrates_to_one() {
        for s2 in [0.5, 1.0, 3.0] {
            let src = SourceModel::new(s2).unwrap();
            let e = 6.0 * src.sigma();
            let m = 600;
            let h = 2.0 * e / m as f64;
            let mut total = 0.0;
            for j in 0..m {
                let y = -e + (j as f64 + 0.5) * h;
                for i in 0..m {
                    let x = -e + (i as f64 + 0.5) * h;
                    total += src.pdf(x, y) * h * h;
                }
            }
            assert!((total - 1.0).abs() < 1e-9, "{s2}: {total}");

            let m = 200_000;
            let h = e / m as f64;
            let radial: f64 = (0..m).map(|i| src.radial_pdf((i as f64 + 0.5) * h) * h).sum();
            assert!((radial - 1.0).abs() < 1e-9);
            assert!((src.mass_within(e) - radial).abs() < 1e-9);
        }
    }

    #[test]
    fn sample_moments() {
        let src = SourceModel::new(2.0).unwrap();
        let xs = src.sample(5, 400_000);
        let n = xs.len() as f64;
        let mean: Complex = xs.iter().sum::<Complex>() / n;
        let power = xs.iter().map(|c| c.norm_sqr()).sum::<f64>() / n;
        let var_re = xs.iter().map(|c| c.re * c.re).sum::<f64>() / n;
        assert!(mean.norm() < 0.02);
        assert!((power - 2.0).abs() < 0.02);
        assert!((var_re - 1.0).abs() < 0.015);
    }

    #[test]
    fn sampling_is_deterministic_and_chunked() {
        let src = SourceModel::unit();
        let a = src.sample(9, SAMPLE_CHUNK + 10);
        let b = src.sample(9, SAMPLE_CHUNK + 10);
        assert_eq!(a, b);
        let tail = src.sample_chunk(9, 1, 10);
        assert_eq!(&a[SAMPLE_CHUNK..], &tail[..]);
        assert_ne!(src.sample(10, 4), src.sample(9, 4));
    }
}
