//! LBG (generalized Lloyd) vector quantizer trained on seeded Gaussian samples.

use rayon::prelude::*;

use crate::codebook::{Codebook, Scheme};
use crate::error::{Error, Result};
use crate::nn::{dist2, NearestIndex};
use crate::source::SourceModel;
use crate::Complex;

/// Samples handled per work item in the assignment step.
const ASSIGN_CHUNK: usize = 1 << 14;

/// Split offset in units of sigma.
const SPLIT_EPS: f64 = 1e-3;

pub const MIN_SAMPLES_PER_CELL: usize = 100;

#[derive(Debug, Clone)]
pub struct LbgRun {
    pub codebook: Codebook,
    /// Training-set distortion after every assignment step, across all split stages.
    pub trace: Vec<f64>,
    pub iterations: usize,
    /// Every split stage met the tolerance before `max_iter`.
    pub converged: bool,
}

struct Assignment {
    distortion: f64,
    count: Vec<u64>,
    sum: Vec<Complex>,
    cell_err: Vec<f64>,
    dist: Vec<f64>,
}

/// Per-sample assignment with a lower bound on the distance to every other centroid.
/// A sample whose current distance stays below the bound after the centroids move
/// keeps its cell without a search; the result equals a full nearest-neighbour pass.
struct Bounds {
    cell: Vec<u32>,
    lower: Vec<f64>,
    valid: bool,
}

impl Bounds {
    fn new(len: usize) -> Self {
        Bounds { cell: vec![0; len], lower: vec![0.0; len], valid: false }
    }
}

fn assign(samples: &[Complex], centroids: &[Complex], bounds: &mut Bounds, drift: f64, scale: f64) -> Assignment {
    let n = centroids.len();
    let index = NearestIndex::new(centroids);
    let valid = bounds.valid;
    let margin = 1e-9 * scale;
    let parts: Vec<(Vec<u64>, Vec<Complex>, Vec<f64>, Vec<f64>)> = samples
        .par_chunks(ASSIGN_CHUNK)
        .zip(bounds.cell.par_chunks_mut(ASSIGN_CHUNK))
        .zip(bounds.lower.par_chunks_mut(ASSIGN_CHUNK))
        .map(|((chunk, cells), lower)| {
            let mut count = vec![0u64; n];
            let mut sum = vec![Complex::new(0.0, 0.0); n];
            let mut err = vec![0.0; n];
            let mut dist = Vec::with_capacity(chunk.len());
            for ((&p, cell), low) in chunk.iter().zip(cells.iter_mut()).zip(lower.iter_mut()) {
                let mut hit = None;
                if valid {
                    let c = centroids[*cell as usize];
                    let d2 = dist2(p.re, p.im, c.re, c.im);
                    let l = *low - drift;
                    if d2.sqrt() < l - margin {
                        *low = l;
                        hit = Some((*cell as usize, d2));
                    }
                }
                let (k, d2) = hit.unwrap_or_else(|| {
                    let (k, d2, second) = index.nearest_two(p);
                    *cell = k as u32;
                    *low = second.sqrt();
                    (k, d2)
                });
                count[k] += 1;
                sum[k] += p;
                err[k] += d2;
                dist.push(d2);
            }
            (count, sum, err, dist)
        })
        .collect();
    bounds.valid = true;
    let mut out = Assignment {
        distortion: 0.0,
        count: vec![0; n],
        sum: vec![Complex::new(0.0, 0.0); n],
        cell_err: vec![0.0; n],
        dist: Vec::with_capacity(samples.len()),
    };
    for (count, sum, err, dist) in parts {
        for k in 0..n {
            out.count[k] += count[k];
            out.sum[k] += sum[k];
            out.cell_err[k] += err[k];
        }
        out.dist.extend(dist);
    }
    out.distortion = out.cell_err.iter().sum::<f64>() / samples.len() as f64;
    out
}

/// Centroid update. Empty cells move onto the samples farthest from their current
/// centroid, which can only lower the training distortion. Returns the largest
/// centroid displacement.
fn update(samples: &[Complex], a: &Assignment, centroids: &mut [Complex]) -> f64 {
    let old = centroids.to_vec();
    let mut empty = Vec::new();
    for (k, c) in centroids.iter_mut().enumerate() {
        if a.count[k] == 0 {
            empty.push(k);
        } else {
            *c = a.sum[k] / a.count[k] as f64;
        }
    }
    if !empty.is_empty() {
        reseed(samples, a, centroids, &empty);
    }
    old.iter().zip(centroids.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

fn reseed(samples: &[Complex], a: &Assignment, centroids: &mut [Complex], empty: &[usize]) {
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&i, &j| a.dist[j].total_cmp(&a.dist[i]).then(i.cmp(&j)));
    for (k, &j) in empty.iter().zip(&order) {
        centroids[*k] = samples[j];
    }
}

/// Trains an `n`-level codebook on `num_samples` draws from the source (seeded).
///
/// Starts from the sample mean and doubles the codebook by splitting every centroid
/// `c` into `c` and `c + eps`; when doubling would overshoot `n`, only the cells
/// with the largest training error are split. Each stage runs k-means until the
/// relative distortion decrease drops to `tol` or `max_iter` steps pass.
pub fn train_lbg(n: usize, sigma2: f64, num_samples: usize, seed: u64, tol: f64, max_iter: usize) -> Result<LbgRun> {
    let source = SourceModel::new(sigma2)?;
    if n == 0 {
        return Err(Error::InvalidN { scheme: "lbg", n, reason: "need at least one centroid".into() });
    }
    if num_samples < MIN_SAMPLES_PER_CELL * n {
        return Err(Error::Domain(format!(
            "LBG needs at least {} samples for N = {n}, got {num_samples}",
            MIN_SAMPLES_PER_CELL * n
        )));
    }
    let samples = source.sample(seed, num_samples);
    let eps = Complex::new(SPLIT_EPS, SPLIT_EPS) * source.sigma();

    let mean = samples.iter().sum::<Complex>() / num_samples as f64;
    let mut centroids = vec![mean];
    let mut trace = Vec::new();
    let mut bounds = Bounds::new(num_samples);
    let mut iterations = 0;
    let mut converged = true;
    loop {
        let mut prev = f64::INFINITY;
        let mut steps = 0;
        let mut drift = 0.0;
        bounds.valid = false;
        let a = loop {
            let a = assign(&samples, &centroids, &mut bounds, drift, source.sigma());
            trace.push(a.distortion);
            steps += 1;
            if prev - a.distortion <= tol * a.distortion {
                break a;
            }
            if steps >= max_iter {
                converged = false;
                break a;
            }
            prev = a.distortion;
            drift = update(&samples, &a, &mut centroids);
        };
        iterations += steps;
        let k = centroids.len();
        if k == n {
            break;
        }
        let split = (n - k).min(k);
        let mut worst: Vec<usize> = (0..k).collect();
        worst.sort_by(|&i, &j| a.cell_err[j].total_cmp(&a.cell_err[i]).then(i.cmp(&j)));
        worst.truncate(split);
        worst.sort_unstable();
        for i in worst {
            centroids.push(centroids[i] + eps);
        }
    }

    let codebook = Codebook::new(Scheme::LBG, sigma2, centroids)?
        .with_meta("seed", seed)
        .with_meta("num_samples", num_samples)
        .with_meta("iterations", iterations)
        .with_meta("converged", converged)
        .with_meta("tol", tol)
        .with_meta("max_iter", max_iter)
        .with_meta("training_distortion", *trace.last().unwrap_or(&f64::NAN));
    Ok(LbgRun { codebook, trace, iterations, converged })
}
