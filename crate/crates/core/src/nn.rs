//! Uniform-grid bucketing for nearest-centroid search in the plane.
//!
//! The search visits buckets in growing Chebyshev rings around the query's home
//! bucket and stops once no unvisited bucket can hold a closer centroid. Distances
//! are computed exactly as the linear scan does, so results (ties included) are
//! bit-identical to [`nearest_linear`].

use crate::Complex;

#[inline]
pub(crate) fn dist2(px: f64, py: f64, cx: f64, cy: f64) -> f64 {
    let dx = px - cx;
    let dy = py - cy;
    dx * dx + dy * dy
}

/// Brute-force nearest centroid; smallest index wins ties. Returns a 0-based slot.
pub fn nearest_linear(centroids: &[Complex], p: Complex) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = dist2(p.re, p.im, c.re, c.im);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct NearestIndex {
    x0: f64,
    y0: f64,
    side: f64,
    nx: usize,
    ny: usize,
    /// CSR offsets into `slots`, length nx*ny + 1.
    offsets: Vec<u32>,
    /// (x, y, 0-based centroid slot), grouped by bucket.
    slots: Vec<(f64, f64, u32)>,
    /// Centroids in slot order.
    points: Vec<(f64, f64)>,
    /// `(d_nn / 2)^2` per slot, `d_nn` the distance to the closest other centroid.
    /// A query strictly inside that disk has this slot as its unique nearest.
    half_nn2: Vec<f64>,
}

impl NearestIndex {
    pub fn new(centroids: &[Complex]) -> Self {
        assert!(!centroids.is_empty());
        let (mut xmin, mut xmax, mut ymin, mut ymax) =
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for c in centroids {
            xmin = xmin.min(c.re);
            xmax = xmax.max(c.re);
            ymin = ymin.min(c.im);
            ymax = ymax.max(c.im);
        }
        let w = (xmax - xmin).max(1e-300);
        let h = (ymax - ymin).max(1e-300);
        let n = centroids.len() as f64;
        // about one centroid per bucket on average over the bounding box
        // at least max(w, h) / n so collinear sets do not get a needle-thin grid
        let mut side = (w * h / n).sqrt().max(w.max(h) / n);
        if !(side.is_finite() && side > 0.0) {
            side = w.max(h);
        }
        let nx = ((w / side).floor() as usize + 1).clamp(1, 4096);
        let ny = ((h / side).floor() as usize + 1).clamp(1, 4096);
        let side = (w / nx as f64).max(h / ny as f64).max(1e-300) * (1.0 + 1e-12);

        let mut index = NearestIndex {
            x0: xmin,
            y0: ymin,
            side,
            nx,
            ny,
            offsets: vec![0; nx * ny + 1],
            slots: Vec::with_capacity(centroids.len()),
            points: centroids.iter().map(|c| (c.re, c.im)).collect(),
            half_nn2: Vec::new(),
        };
        let buckets: Vec<usize> = centroids
            .iter()
            .map(|c| {
                let (i, j) = index.home(c.re, c.im);
                j * nx + i
            })
            .collect();
        for &b in &buckets {
            index.offsets[b + 1] += 1;
        }
        for b in 0..nx * ny {
            index.offsets[b + 1] += index.offsets[b];
        }
        let mut fill = index.offsets.clone();
        let mut slots = vec![(0.0, 0.0, 0u32); centroids.len()];
        // ascending slot order within each bucket
        for (slot, (c, &b)) in centroids.iter().zip(&buckets).enumerate() {
            slots[fill[b] as usize] = (c.re, c.im, slot as u32);
            fill[b] += 1;
        }
        index.slots = slots;
        index.half_nn2 = (0..centroids.len())
            .map(|k| {
                let (x, y) = index.points[k];
                let (_, d2) = index.search(x, y, k as u32);
                if d2.is_finite() { d2 / 4.0 } else { f64::INFINITY }
            })
            .collect();
        index
    }

    #[inline]
    fn home(&self, x: f64, y: f64) -> (usize, usize) {
        let fi = ((x - self.x0) / self.side).floor();
        let fj = ((y - self.y0) / self.side).floor();
        let i = if fi.is_nan() || fi < 0.0 { 0 } else { (fi as usize).min(self.nx - 1) };
        let j = if fj.is_nan() || fj < 0.0 { 0 } else { (fj as usize).min(self.ny - 1) };
        (i, j)
    }

    #[inline]
    fn scan_bucket(&self, b: usize, px: f64, py: f64, skip: u32, best: &mut u32, best_d: &mut f64) {
        let lo = self.offsets[b] as usize;
        let hi = self.offsets[b + 1] as usize;
        for &(cx, cy, slot) in &self.slots[lo..hi] {
            if slot == skip {
                continue;
            }
            let d = dist2(px, py, cx, cy);
            if d < *best_d || (d == *best_d && slot < *best) {
                *best_d = d;
                *best = slot;
            }
        }
    }

    /// Nearest centroid slot (0-based) and its squared distance.
    #[inline]
    pub fn nearest_with_dist(&self, p: Complex) -> (usize, f64) {
        let (slot, d2) = self.search(p.re, p.im, u32::MAX);
        (slot as usize, d2)
    }

    /// Like [`nearest_with_dist`](Self::nearest_with_dist), but first tests `hint`
    /// (typically the answer for a neighbouring query) against its exclusion disk.
    #[inline]
    pub fn nearest_with_hint(&self, p: Complex, hint: usize) -> (usize, f64) {
        if let Some(&(cx, cy)) = self.points.get(hint) {
            let d2 = dist2(p.re, p.im, cx, cy);
            if d2 < self.half_nn2[hint] {
                return (hint, d2);
            }
        }
        self.nearest_with_dist(p)
    }

    /// Nearest slot with its squared distance, plus the squared distance of the
    /// runner-up (infinite for a single centroid).
    pub fn nearest_two(&self, p: Complex) -> (usize, f64, f64) {
        let (px, py) = (p.re, p.im);
        let (hi, hj) = self.home(px, py);
        let mut best = u32::MAX;
        let mut best_d = f64::INFINITY;
        let mut second_d = f64::INFINITY;
        let scan = |b: usize, best: &mut u32, best_d: &mut f64, second_d: &mut f64| {
            let lo = self.offsets[b] as usize;
            let hi = self.offsets[b + 1] as usize;
            for &(cx, cy, slot) in &self.slots[lo..hi] {
                let d = dist2(px, py, cx, cy);
                if d < *best_d || (d == *best_d && slot < *best) {
                    *second_d = *best_d;
                    *best_d = d;
                    *best = slot;
                } else if d < *second_d {
                    *second_d = d;
                }
            }
        };
        let max_ring = self.nx.max(self.ny);
        for k in 0..=max_ring {
            let i_lo = hi as isize - k as isize;
            let i_hi = hi + k;
            let j_lo = hj as isize - k as isize;
            let j_hi = hj + k;
            for j in j_lo.max(0) as usize..=j_hi.min(self.ny - 1) {
                if j as isize == j_lo || j == j_hi {
                    for i in i_lo.max(0) as usize..=i_hi.min(self.nx - 1) {
                        scan(j * self.nx + i, &mut best, &mut best_d, &mut second_d);
                    }
                } else {
                    if i_lo >= 0 {
                        scan(j * self.nx + i_lo as usize, &mut best, &mut best_d, &mut second_d);
                    }
                    if i_hi < self.nx {
                        scan(j * self.nx + i_hi, &mut best, &mut best_d, &mut second_d);
                    }
                }
            }
            let lb = self.outside_bound(px, py, i_lo, i_hi, j_lo, j_hi);
            if lb == f64::INFINITY {
                break;
            }
            if second_d.is_finite() && lb > second_d {
                break;
            }
        }
        (best as usize, best_d, second_d)
    }

    /// Lower bound on the squared distance from the query to any bucket outside
    /// the block `[i_lo, i_hi] x [j_lo, j_hi]`; infinite when the block spans the
    /// whole index.
    #[inline]
    fn outside_bound(&self, px: f64, py: f64, i_lo: isize, i_hi: usize, j_lo: isize, j_hi: usize) -> f64 {
        let x_hi = self.x0 + self.nx as f64 * self.side;
        let y_hi = self.y0 + self.ny as f64 * self.side;
        // offsets to the index box along each axis
        let ox = (self.x0 - px).max(px - x_hi).max(0.0);
        let oy = (self.y0 - py).max(py - y_hi).max(0.0);
        let slab = |d: f64, other: f64| {
            let d = d.max(0.0);
            d * d + other * other
        };
        let mut lb = f64::INFINITY;
        if i_lo > 0 {
            lb = lb.min(slab(px - (self.x0 + i_lo as f64 * self.side), oy));
        }
        if i_hi + 1 < self.nx {
            lb = lb.min(slab(self.x0 + (i_hi + 1) as f64 * self.side - px, oy));
        }
        if j_lo > 0 {
            lb = lb.min(slab(py - (self.y0 + j_lo as f64 * self.side), ox));
        }
        if j_hi + 1 < self.ny {
            lb = lb.min(slab(self.y0 + (j_hi + 1) as f64 * self.side - py, ox));
        }
        lb * (1.0 - 1e-12)
    }

    /// Ring search; `skip` excludes one slot (u32::MAX excludes none).
    fn search(&self, px: f64, py: f64, skip: u32) -> (u32, f64) {
        let (hi, hj) = self.home(px, py);
        let mut best = u32::MAX;
        let mut best_d = f64::INFINITY;
        let max_ring = self.nx.max(self.ny);
        for k in 0..=max_ring {
            let i_lo = hi as isize - k as isize;
            let i_hi = hi + k;
            let j_lo = hj as isize - k as isize;
            let j_hi = hj + k;
            if k == 0 {
                self.scan_bucket(hj * self.nx + hi, px, py, skip, &mut best, &mut best_d);
            } else {
                for j in j_lo.max(0) as usize..=j_hi.min(self.ny - 1) {
                    let on_edge_row = j as isize == j_lo || j == j_hi;
                    if on_edge_row {
                        for i in i_lo.max(0) as usize..=i_hi.min(self.nx - 1) {
                            self.scan_bucket(j * self.nx + i, px, py, skip, &mut best, &mut best_d);
                        }
                    } else {
                        if i_lo >= 0 {
                            self.scan_bucket(j * self.nx + i_lo as usize, px, py, skip, &mut best, &mut best_d);
                        }
                        if i_hi < self.nx {
                            self.scan_bucket(j * self.nx + i_hi, px, py, skip, &mut best, &mut best_d);
                        }
                    }
                }
            }
            let lb = self.outside_bound(px, py, i_lo, i_hi, j_lo, j_hi);
            if lb == f64::INFINITY {
                break;
            }
            if best_d.is_finite() && lb > best_d {
                break;
            }
        }
        (best, best_d)
    }

    #[inline]
    pub fn nearest(&self, p: Complex) -> usize {
        self.nearest_with_dist(p).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(state: &mut u64) -> f64 {
        *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*state >> 11) as f64) / (1u64 << 53) as f64
    }

    #[test]
    fn single_centroid() {
        let c = [Complex::new(0.3, -0.2)];
        let idx = NearestIndex::new(&c);
        assert_eq!(idx.nearest(Complex::new(100.0, 5.0)), 0);
        assert_eq!(idx.nearest(Complex::new(-1e9, 0.0)), 0);
    }

    #[test]
    fn duplicate_centroids_pick_smallest_slot() {
        let c = [Complex::new(1.0, 1.0), Complex::new(0.0, 0.0), Complex::new(1.0, 1.0)];
        let idx = NearestIndex::new(&c);
        assert_eq!(idx.nearest(Complex::new(1.1, 1.0)), 0);
        assert_eq!(nearest_linear(&c, Complex::new(1.1, 1.0)), 0);
    }

    #[test]
    fn collinear_centroids() {
        let c: Vec<Complex> = (0..50).map(|i| Complex::new(i as f64 * 0.1, 0.0)).collect();
        let idx = NearestIndex::new(&c);
        let mut s = 7u64;
        for _ in 0..2000 {
            let p = Complex::new(lcg(&mut s) * 8.0 - 2.0, lcg(&mut s) * 4.0 - 2.0);
            assert_eq!(idx.nearest(p), nearest_linear(&c, p));
        }
    }

    #[test]
    fn clustered_matches_linear_scan() {
        let mut s = 11u64;
        let c: Vec<Complex> = (0..300)
            .map(|i| {
                let r = if i % 10 == 0 { 5.0 } else { 0.3 } * lcg(&mut s);
                let t = lcg(&mut s) * std::f64::consts::TAU;
                Complex::from_polar(r, t)
            })
            .collect();
        let idx = NearestIndex::new(&c);
        for _ in 0..20000 {
            let p = Complex::new(lcg(&mut s) * 14.0 - 7.0, lcg(&mut s) * 14.0 - 7.0);
            assert_eq!(idx.nearest(p), nearest_linear(&c, p));
        }
    }

    #[test]
    fn hinted_search_matches_linear_scan() {
        let mut s = 3u64;
        let c: Vec<Complex> = (1..=200)
            .map(|n| Complex::from_polar((n as f64).sqrt() * 0.1, n as f64 * 2.399963229728653))
            .collect();
        let idx = NearestIndex::new(&c);
        let mut hint = 0;
        for _ in 0..20000 {
            let p = Complex::new(lcg(&mut s) * 4.0 - 2.0, lcg(&mut s) * 4.0 - 2.0);
            let (slot, d2) = idx.nearest_with_hint(p, hint);
            assert_eq!(slot, nearest_linear(&c, p));
            assert_eq!(d2, idx.nearest_with_dist(p).1);
            hint = if lcg(&mut s) < 0.5 { slot } else { (lcg(&mut s) * 200.0) as usize };
        }
    }

    #[test]
    fn runner_up_matches_sorted_distances() {
        let mut s = 5u64;
        let c: Vec<Complex> = (0..90)
            .map(|_| Complex::new(lcg(&mut s) * 3.0, lcg(&mut s) * 2.0))
            .collect();
        let idx = NearestIndex::new(&c);
        for _ in 0..5000 {
            let p = Complex::new(lcg(&mut s) * 9.0 - 3.0, lcg(&mut s) * 9.0 - 3.0);
            let mut d: Vec<f64> = c.iter().map(|q| (p - q).norm_sqr()).collect();
            d.sort_by(f64::total_cmp);
            let (slot, b, second) = idx.nearest_two(p);
            assert_eq!(slot, nearest_linear(&c, p));
            assert_eq!((b, second), (d[0], d[1]));
        }
        let one = NearestIndex::new(&c[..1]);
        assert_eq!(one.nearest_two(Complex::new(4.0, 4.0)).2, f64::INFINITY);
    }
}
