use gq_core::eval::voronoi::voronoi_cells;
use gq_core::highrate::{analytic_distortion_hr, rd_distortion};
use gq_core::{
    build_highrate, mc_distortion, optimize_lloydmax, papr, Codebook, Complex, LloydMaxConfig, QuadratureGrid,
    RadiusConvention, Scheme, SourceModel,
};

type Result<T> = std::result::Result<T, String>;

fn err(e: gq_core::Error) -> String {
    e.to_string()
}

fn unflatten(flat: &[f64]) -> Result<Vec<Complex>> {
    if flat.is_empty() || flat.len() % 2 != 0 {
        return Err(format!("expected a nonempty even-length coordinate list, got {} values", flat.len()));
    }
    Ok(flat.chunks_exact(2).map(|p| Complex::new(p[0], p[1])).collect())
}

fn flatten(cb: &Codebook) -> Vec<f64> {
    cb.centroids().iter().flat_map(|c| [c.re, c.im]).collect()
}

fn lloydmax(n: usize, sigma2: f64, grid_m: usize) -> Result<Codebook> {
    let source = SourceModel::new(sigma2).map_err(err)?;
    let grid = QuadratureGrid::for_source(&source, grid_m).map_err(err)?;
    let config = LloydMaxConfig { grid: Some(grid), ..LloydMaxConfig::default() };
    Ok(optimize_lloydmax(n, sigma2, &config).map_err(err)?.0)
}

pub fn golden_codebook(scheme: &str, n: usize, sigma2: f64, grid_m: usize) -> Result<Vec<f64>> {
    let cb = match scheme {
        "highrate" => build_highrate(n, sigma2, RadiusConvention::Midpoint).map_err(err)?,
        "lloydmax" => lloydmax(n, sigma2, grid_m)?,
        other => return Err(format!("unknown scheme `{other}` (use highrate or lloydmax)")),
    };
    Ok(flatten(&cb))
}

pub fn voronoi(centroids: &[f64], extent: f64) -> Result<Vec<f64>> {
    if !(extent.is_finite() && extent > 0.0) {
        return Err(format!("extent must be positive, got {extent}"));
    }
    let cells = voronoi_cells(&unflatten(centroids)?, extent);
    let mut out = Vec::new();
    for poly in cells {
        out.push(poly.len() as f64);
        out.extend(poly.iter().flat_map(|&(x, y)| [x, y]));
    }
    Ok(out)
}

pub fn evaluate(centroids: &[f64], sigma2: f64, samples: usize, seed: u64) -> Result<Vec<f64>> {
    let source = SourceModel::new(sigma2).map_err(err)?;
    let cb = Codebook::new(Scheme::LBG, sigma2, unflatten(centroids)?).map_err(err)?;
    let r = mc_distortion(&cb, &source, samples, seed).map_err(err)?;
    let n = cb.len();
    Ok(vec![
        r.mse,
        r.mse_db,
        r.ci_halfwidth,
        r.rate_bits,
        rd_distortion(r.rate_bits, sigma2),
        analytic_distortion_hr(n, sigma2),
        papr(&cb, None).unwrap_or(f64::NAN),
    ])
}

pub fn magnitude_profile(n: usize, sigma2: f64, grid_m: usize) -> Result<Vec<f64>> {
    let mut out = build_highrate(n, sigma2, RadiusConvention::Midpoint).map_err(err)?.radii();
    out.extend(lloydmax(n, sigma2, grid_m)?.radii());
    Ok(out)
}
