//! Voronoi cell polygons clipped to a square, for plotting.

use crate::Complex;

/// Convex polygon, counter-clockwise, first vertex not repeated.
pub type Polygon = Vec<(f64, f64)>;

/// Keeps the part of `poly` where `a x + b y <= c`.
fn clip(poly: &Polygon, a: f64, b: f64, c: f64) -> Polygon {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let side = |p: (f64, f64)| a * p.0 + b * p.1 - c;
    for k in 0..poly.len() {
        let p = poly[k];
        let q = poly[(k + 1) % poly.len()];
        let (sp, sq) = (side(p), side(q));
        if sp <= 0.0 {
            out.push(p);
        }
        if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
            let t = sp / (sp - sq);
            out.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
        }
    }
    out
}

/// Cell of every centroid within `[-extent, extent]^2`. Of coincident centroids
/// the lowest index owns the cell and the others get an empty polygon.
pub fn voronoi_cells(centroids: &[Complex], extent: f64) -> Vec<Polygon> {
    let square: Polygon = vec![(-extent, -extent), (extent, -extent), (extent, extent), (-extent, extent)];
    (0..centroids.len())
        .map(|i| {
            let ci = centroids[i];
            let mut others: Vec<(f64, usize)> = centroids
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, c)| ((c - ci).norm_sqr(), j))
                .collect();
            others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut poly = square.clone();
            for (d2, j) in others {
                if poly.is_empty() {
                    break;
                }
                if d2 == 0.0 {
                    if j < i {
                        return Vec::new();
                    }
                    continue;
                }
                // no vertex is farther than half the distance to this neighbour
                let reach = poly.iter().map(|&(x, y)| (x - ci.re).powi(2) + (y - ci.im).powi(2)).fold(0.0, f64::max);
                if d2 > 4.0 * reach {
                    break;
                }
                let cj = centroids[j];
                let (a, b) = (2.0 * (cj.re - ci.re), 2.0 * (cj.im - ci.im));
                poly = clip(&poly, a, b, cj.norm_sqr() - ci.norm_sqr());
            }
            poly
        })
        .collect()
}

/// Shoelace area.
pub fn polygon_area(poly: &Polygon) -> f64 {
    let n = poly.len();
    0.5 * (0..n)
        .map(|k| {
            let (p, q) = (poly[k], poly[(k + 1) % n]);
            p.0 * q.1 - q.0 * p.1
        })
        .sum::<f64>()
}

/// Closed polylines as CSV `cell,vertex,x,y` (1-based cell index, first vertex
/// repeated at the end); empty cells produce no rows.
pub fn voronoi_csv(cells: &[Polygon]) -> String {
    let mut out = String::from("cell,vertex,x,y\n");
    for (i, poly) in cells.iter().enumerate() {
        for (k, &(x, y)) in poly.iter().chain(poly.first()).enumerate() {
            out.push_str(&format!("{},{},{:.16e},{:.16e}\n", i + 1, k, x, y));
        }
    }
    out
}
