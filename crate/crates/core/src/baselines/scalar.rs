//! One-dimensional Lloyd-Max quantizers with closed-form cell moments.

use std::f64::consts::{PI, SQRT_2};

use libm::erfc;

use crate::error::{Error, Result};

/// Densities with closed-form partial moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    /// Zero-mean Gaussian with the given variance (one real dimension).
    GaussianPerDim { var: f64 },
    /// Magnitude of the complex Gaussian with total variance `sigma2`:
    /// `f(r) = 2 r exp(-r^2 / sigma2) / sigma2` on `r >= 0`.
    Rayleigh { sigma2: f64 },
}

impl Density {
    fn validate(self) -> Result<()> {
        let v = match self {
            Density::GaussianPerDim { var } => var,
            Density::Rayleigh { sigma2 } => sigma2,
        };
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidVariance(v));
        }
        Ok(())
    }

    pub fn scale(self) -> f64 {
        match self {
            Density::GaussianPerDim { var } => var.sqrt(),
            Density::Rayleigh { sigma2 } => sigma2.sqrt(),
        }
    }

    pub fn support(self) -> (f64, f64) {
        match self {
            Density::GaussianPerDim { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            Density::Rayleigh { .. } => (0.0, f64::INFINITY),
        }
    }

    pub fn mean(self) -> f64 {
        match self {
            Density::GaussianPerDim { .. } => 0.0,
            Density::Rayleigh { sigma2 } => 0.5 * (PI * sigma2).sqrt(),
        }
    }

    pub fn cdf(self, x: f64) -> f64 {
        match self {
            Density::GaussianPerDim { var } => 0.5 * erfc(-x / (SQRT_2 * var.sqrt())),
            Density::Rayleigh { sigma2 } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-x * x / sigma2).exp_m1()
                }
            }
        }
    }

    /// Inverse CDF by bisection.
    pub fn quantile(self, p: f64) -> f64 {
        if let Density::Rayleigh { sigma2 } = self {
            return (-sigma2 * (-p).ln_1p()).sqrt();
        }
        let s = self.scale();
        let (mut lo, mut hi) = (-40.0 * s, 40.0 * s);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// `(P, E[X; a<X<b], E[X^2; a<X<b])` over the interval `(a, b)`.
    pub fn partial_moments(self, a: f64, b: f64) -> (f64, f64, f64) {
        match self {
            Density::GaussianPerDim { var } => {
                let s = var.sqrt();
                let (za, zb) = (a / s, b / s);
                let pdf = |z: f64| {
                    if z.is_infinite() {
                        0.0
                    } else {
                        (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
                    }
                };
                let zpdf = |z: f64| if z.is_infinite() { 0.0 } else { z * pdf(z) };
                // tail differences keep precision far from the mean
                let m0 = if za >= 0.0 {
                    0.5 * (erfc(za / SQRT_2) - erfc(zb / SQRT_2))
                } else if zb <= 0.0 {
                    0.5 * (erfc(-zb / SQRT_2) - erfc(-za / SQRT_2))
                } else {
                    1.0 - 0.5 * (erfc(zb / SQRT_2) + erfc(-za / SQRT_2))
                };
                let m1 = s * (pdf(za) - pdf(zb));
                let m2 = var * (m0 + zpdf(za) - zpdf(zb));
                (m0, m1, m2)
            }
            Density::Rayleigh { sigma2 } => {
                let s = sigma2.sqrt();
                let a = a.max(0.0);
                let (ta, tb) = (a / s, b / s);
                let ea = (-ta * ta).exp();
                let eb = if tb.is_infinite() { 0.0 } else { (-tb * tb).exp() };
                let tea = ta * ea;
                let teb = if tb.is_infinite() { 0.0 } else { tb * eb };
                let m0 = ea - eb;
                let m1 = s * ((tea - teb) + 0.5 * PI.sqrt() * (erfc(ta) - erfc(tb)));
                let sq = |t: f64, e: f64| if t.is_infinite() { 0.0 } else { (t * t + 1.0) * e };
                let m2 = sigma2 * (sq(ta, ea) - sq(tb, eb));
                (m0, m1, m2)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarQuantizer {
    pub density: Density,
    /// Reproduction levels, ascending.
    pub levels: Vec<f64>,
    /// Decision thresholds, ascending, `levels.len() - 1` of them.
    pub boundaries: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl ScalarQuantizer {
    /// Cell `i` spans `(edges[i], edges[i+1])`.
    pub fn edges(&self) -> Vec<f64> {
        let (lo, hi) = self.density.support();
        let mut e = Vec::with_capacity(self.levels.len() + 1);
        e.push(lo);
        e.extend_from_slice(&self.boundaries);
        e.push(hi);
        e
    }

    /// Exact MSE under the design density.
    pub fn mse(&self) -> f64 {
        cell_mse(self.density, &self.edges(), &self.levels)
    }

    pub fn quantize(&self, x: f64) -> f64 {
        let k = self.boundaries.partition_point(|&b| b < x);
        self.levels[k]
    }

    /// Largest gap between a level and the conditional mean of its cell.
    pub fn centroid_error(&self) -> f64 {
        let edges = self.edges();
        self.levels
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                let (m0, m1, _) = self.density.partial_moments(edges[i], edges[i + 1]);
                if m0 > 0.0 {
                    (l - m1 / m0).abs()
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max)
    }
}

/// `sum_i E[(X - l_i)^2; edges[i] < X < edges[i+1]]`.
fn cell_mse(density: Density, edges: &[f64], levels: &[f64]) -> f64 {
    levels
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let (m0, m1, m2) = density.partial_moments(edges[i], edges[i + 1]);
            m2 - 2.0 * l * m1 + l * l * m0
        })
        .sum()
}

/// Classical Lloyd-Max iteration on a 1D density. Stops when no level moves by more
/// than `tol * scale`; if `max_iter` is reached first the last iterate is returned
/// with `converged = false`.
pub fn lloyd_scalar(density: Density, n: usize, tol: f64, max_iter: usize) -> Result<ScalarQuantizer> {
    lloyd_shrunk(density, n, 1.0, tol, max_iter)
}

/// Lloyd-Max for reproduction values `kappa * level` with `0 < kappa <= 1`, the
/// magnitude problem of a polar quantizer whose phase cells have angular width
/// `2 pi / P` (`kappa = sinc(pi / P)`). Levels returned already include the factor.
pub(crate) fn lloyd_shrunk(
    density: Density,
    n: usize,
    kappa: f64,
    tol: f64,
    max_iter: usize,
) -> Result<ScalarQuantizer> {
    density.validate()?;
    if n == 0 {
        return Err(Error::Domain("scalar quantizer needs at least one level".into()));
    }
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(Error::Domain(format!("shrink factor {kappa} outside (0, 1]")));
    }
    let (lo, hi) = density.support();
    let scale = density.scale();

    // equal-probability start
    let mut edges: Vec<f64> = (0..=n)
        .map(|k| match k {
            0 => lo,
            k if k == n => hi,
            k => density.quantile(k as f64 / n as f64),
        })
        .collect();
    let mut levels = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        let mut moved: f64 = 0.0;
        for i in 0..n {
            let (m0, m1, _) = density.partial_moments(edges[i], edges[i + 1]);
            let next = if m0 > 0.0 {
                kappa * m1 / m0
            } else {
                // cell mass underflowed; keep it inside its interval
                let (a, b) = (edges[i].max(lo), edges[i + 1].min(hi));
                kappa * if a.is_finite() && b.is_finite() { 0.5 * (a + b) } else if a.is_finite() { a } else { b }
            };
            moved = moved.max((next - levels[i]).abs());
            levels[i] = next;
        }
        for i in 1..n {
            edges[i] = 0.5 * (levels[i - 1] + levels[i]) / kappa;
        }
        iterations += 1;
        if iterations > 1 && moved <= tol * scale {
            converged = true;
            break;
        }
    }

    Ok(ScalarQuantizer {
        density,
        levels,
        boundaries: edges[1..n].to_vec(),
        iterations,
        converged,
    })
}

/// Symmetric uniform quantizer with step `step`.
pub fn uniform_levels(n: usize, step: f64) -> Vec<f64> {
    (0..n).map(|k| (k as f64 - 0.5 * (n as f64 - 1.0)) * step).collect()
}

/// Exact MSE of the symmetric `n`-level uniform quantizer with step `step`.
pub fn uniform_mse(density: Density, n: usize, step: f64) -> f64 {
    let levels = uniform_levels(n, step);
    let (lo, hi) = density.support();
    let mut edges = vec![lo];
    edges.extend(levels.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    edges.push(hi);
    cell_mse(density, &edges, &levels)
}

/// Uniform quantizer whose step minimizes the MSE (coarse scan, then golden-section).
pub fn optimal_uniform(density: Density, n: usize) -> Result<ScalarQuantizer> {
    density.validate()?;
    if n == 0 {
        return Err(Error::Domain("scalar quantizer needs at least one level".into()));
    }
    let s = density.scale();
    if n == 1 {
        return Ok(ScalarQuantizer {
            density,
            levels: vec![0.0],
            boundaries: vec![],
            iterations: 0,
            converged: true,
        });
    }
    let f = |step: f64| uniform_mse(density, n, step);
    let (lo, hi) = (1e-3 * s, 12.0 * s / (n as f64 - 1.0).max(1.0) + 1e-3 * s);
    let samples = 400;
    let mut best = (f64::INFINITY, lo);
    for k in 0..=samples {
        let step = lo + (hi - lo) * k as f64 / samples as f64;
        let v = f(step);
        if v < best.0 {
            best = (v, step);
        }
    }
    let h = (hi - lo) / samples as f64;
    let (mut a, mut b) = ((best.1 - h).max(lo), best.1 + h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let step = 0.5 * (a + b);
    let levels = uniform_levels(n, step);
    let boundaries = levels.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    Ok(ScalarQuantizer {
        density,
        levels,
        boundaries,
        iterations: 0,
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const G1: Density = Density::GaussianPerDim { var: 1.0 };

    #[test]
    fn moments_match_quadrature() {
        for d in [G1, Density::GaussianPerDim { var: 0.5 }, Density::Rayleigh { sigma2: 1.5 }] {
            for (a, b) in [(-0.3f64, 0.9), (0.2, 1.1), (1.5, 3.0)] {
                let a = if matches!(d, Density::Rayleigh { .. }) { a.max(0.0) } else { a };
                let m = 20000;
                let h = (b - a) / m as f64;
                let pdf = |x: f64| match d {
                    Density::GaussianPerDim { var } => (-x * x / (2.0 * var)).exp() / (2.0 * PI * var).sqrt(),
                    Density::Rayleigh { sigma2 } => 2.0 * x * (-x * x / sigma2).exp() / sigma2,
                };
                let (mut q0, mut q1, mut q2) = (0.0, 0.0, 0.0);
                for k in 0..m {
                    let x = a + (k as f64 + 0.5) * h;
                    let w = pdf(x) * h;
                    q0 += w;
                    q1 += w * x;
                    q2 += w * x * x;
                }
                let (m0, m1, m2) = d.partial_moments(a, b);
                assert!((m0 - q0).abs() < 1e-8 && (m1 - q1).abs() < 1e-8 && (m2 - q2).abs() < 1e-8);
            }
            let (lo, hi) = d.support();
            let (m0, m1, _) = d.partial_moments(lo, hi);
            assert!((m0 - 1.0).abs() < 1e-14);
            assert!((m1 - d.mean()).abs() < 1e-12);
        }
    }

    #[test]
    fn one_level_sits_at_mean() {
        for d in [G1, Density::Rayleigh { sigma2: 2.0 }] {
            let q = lloyd_scalar(d, 1, 1e-12, 100).unwrap();
            assert!((q.levels[0] - d.mean()).abs() < 1e-12);
            assert!(q.boundaries.is_empty());
        }
    }

    #[test]
    fn two_level_gaussian() {
        let q = lloyd_scalar(G1, 2, 1e-13, 1000).unwrap();
        let l = (2.0 / PI).sqrt();
        assert!((q.levels[1] - l).abs() < 1e-12 && (q.levels[0] + l).abs() < 1e-12);
        assert!((q.mse() - (1.0 - 2.0 / PI)).abs() < 1e-12);
        assert!((q.mse() - 0.3634).abs() < 1e-4);
    }

    #[test]
    fn converged_levels_are_cell_centroids() {
        for n in [3usize, 8, 16] {
            let q = lloyd_scalar(Density::GaussianPerDim { var: 0.5 }, n, 1e-14, 200_000).unwrap();
            assert!(q.converged);
            assert!(q.centroid_error() < 1e-9);
            for (i, b) in q.boundaries.iter().enumerate() {
                assert!(q.levels[i] < *b && *b < q.levels[i + 1]);
            }
            let r = lloyd_scalar(Density::Rayleigh { sigma2: 1.0 }, n, 1e-14, 200_000).unwrap();
            assert!(r.converged && r.centroid_error() < 1e-9);
        }
    }

    #[test]
    fn not_converged_is_flagged() {
        let q = lloyd_scalar(G1, 16, 0.0, 3).unwrap();
        assert!(!q.converged);
        assert_eq!(q.iterations, 3);
    }

    #[test]
    fn uniform_is_worse_than_lloyd() {
        for n in [2usize, 4, 16] {
            let u = optimal_uniform(G1, n).unwrap();
            let l = lloyd_scalar(G1, n, 1e-13, 100_000).unwrap();
            assert!(u.mse() >= l.mse() - 1e-12, "{n}");
        }
        // two levels: uniform and Lloyd coincide
        let u = optimal_uniform(G1, 2).unwrap();
        assert!((u.mse() - (1.0 - 2.0 / PI)).abs() < 1e-9);
    }

    #[test]
    fn quantize_uses_boundaries() {
        let q = lloyd_scalar(G1, 4, 1e-12, 10_000).unwrap();
        assert_eq!(q.quantize(-10.0), q.levels[0]);
        assert_eq!(q.quantize(10.0), q.levels[3]);
        assert_eq!(q.quantize(0.01), q.levels[2]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(lloyd_scalar(G1, 0, 1e-9, 10).is_err());
        assert!(lloyd_scalar(Density::Rayleigh { sigma2: -1.0 }, 2, 1e-9, 10).is_err());
    }
}
