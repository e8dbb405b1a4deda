//! WebAssembly bindings for the browser demo.
//!
//! Everything crosses the boundary as flat `f64` arrays: codebooks are
//! interleaved `[re_1, im_1, re_2, im_2, ...]`. The [`demo`] functions hold the
//! logic and run natively too; the exported wrappers only convert errors.

pub mod demo;

use wasm_bindgen::prelude::*;

fn js(e: String) -> JsError {
    JsError::new(&e)
}

/// Golden codebook (`"highrate"` or `"lloydmax"`) as interleaved coordinates.
#[wasm_bindgen]
pub fn golden_codebook(scheme: &str, n: u32, sigma2: f64, grid_m: u32) -> Result<Vec<f64>, JsError> {
    demo::golden_codebook(scheme, n as usize, sigma2, grid_m as usize).map_err(js)
}

/// Voronoi cells clipped to `[-extent, extent]^2`, flattened as
/// `[k, x_1, y_1, ..., x_k, y_k]` per cell.
#[wasm_bindgen]
pub fn voronoi(centroids: &[f64], extent: f64) -> Result<Vec<f64>, JsError> {
    demo::voronoi(centroids, extent).map_err(js)
}

/// `[mse, mse_db, ci_halfwidth, rate_bits, d_rd, d_hr, papr_db]` by Monte Carlo.
#[wasm_bindgen]
pub fn evaluate(centroids: &[f64], sigma2: f64, samples: u32, seed: u32) -> Result<Vec<f64>, JsError> {
    demo::evaluate(centroids, sigma2, samples as usize, seed as u64).map_err(js)
}

/// High-rate radii followed by Lloyd-Max radii, `2 N` values.
#[wasm_bindgen]
pub fn magnitude_profile(n: u32, sigma2: f64, grid_m: u32) -> Result<Vec<f64>, JsError> {
    demo::magnitude_profile(n as usize, sigma2, grid_m as usize).map_err(js)
}
