//! wasm-bindgen entry points for the browser demo in `www/`. Every export
//! returns a JSON string; the plain functions underneath are what the tests
//! exercise.

use hypdeconv::deconv::{cv_cutoff, cv_t_grid, default_rate_cutoff, estimate_radial, mise, CvConfig, DeconvConfig};
use hypdeconv::distributions::{apply_error, gaussian_law, gaussian_radial_density, ErrorModel};
use hypdeconv::hft::radial_grid;
use hypdeconv::rng::derive_seed;
use hypdeconv::specfun::{ConicalEvalConfig, ConicalRow};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 2000;
const MAX_SAMPLE: usize = 200_000;

#[derive(Debug, Serialize)]
pub struct Curves {
    pub r: Vec<f64>,
    pub x: Vec<f64>,
    pub eps: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct Deconvolution {
    pub r: Vec<f64>,
    pub estimate: Vec<f64>,
    pub truth: Vec<f64>,
    pub cutoff: f64,
    pub rule: &'static str,
    pub ise: f64,
}

#[derive(Debug, Serialize)]
pub struct Profile {
    pub r: Vec<f64>,
    pub p: Vec<f64>,
}

fn check_points(points: usize) -> hypdeconv::Result<()> {
    if !(2..=MAX_POINTS).contains(&points) {
        return Err(hypdeconv::Error::InvalidParameter(format!("points must be in 2..={MAX_POINTS}, got {points}")));
    }
    Ok(())
}

/// Radial profiles of g_ρ, g_ρε and their convolution g_{ρ+ρε}.
pub fn heat_curves(rho: f64, rho_eps: f64, r_max: f64, points: usize) -> hypdeconv::Result<Curves> {
    check_points(points)?;
    let r = radial_grid(r_max, points - 1);
    let x = gaussian_radial_density(rho, &r)?.values().to_vec();
    let eps = gaussian_radial_density(rho_eps, &r)?.values().to_vec();
    let y = gaussian_radial_density(rho + rho_eps, &r)?.values().to_vec();
    Ok(Curves { r, x, eps, y })
}

/// Simulates n points of g_ρ blurred by g_ρε and deconvolves. A cutoff ≤ 0
/// selects T by cross-validation.
pub fn simulate_and_deconvolve(n: usize, rho: f64, rho_eps: f64, seed: u64, cutoff: f64, r_max: f64) -> hypdeconv::Result<Deconvolution> {
    if n > MAX_SAMPLE {
        return Err(hypdeconv::Error::InvalidParameter(format!("n is capped at {MAX_SAMPLE} in the demo")));
    }
    let error = ErrorModel::gaussian(rho_eps)?;
    let xs = gaussian_law(rho)?.sample_h(n, derive_seed(seed, 1))?;
    let ys = apply_error(&error.sample_sl2(n, derive_seed(seed, 2))?, &xs)?;
    let (t, rule) = if cutoff > 0.0 {
        (cutoff, "fixed")
    } else {
        (cv_cutoff(&ys, &error, &cv_t_grid(&error, n)?, &CvConfig::default())?.selected, "cv")
    };
    let r = radial_grid(r_max, 200);
    let res = estimate_radial(&ys, &DeconvConfig::new(t, error, r.clone())?)?;
    let truth = gaussian_radial_density(rho, &r)?;
    Ok(Deconvolution {
        ise: mise(&res.estimate, &truth),
        estimate: res.estimate.values().to_vec(),
        truth: truth.values().to_vec(),
        r,
        cutoff: t,
        rule,
    })
}

/// P_{−1/2+it}(cosh r) on [0, r_max].
pub fn conical_profile(t: f64, r_max: f64, points: usize) -> hypdeconv::Result<Profile> {
    check_points(points)?;
    let r = radial_grid(r_max, points - 1);
    let cfg = ConicalEvalConfig::default();
    let p = r.iter().map(|&ri| Ok(ConicalRow::new(ri, t, &cfg)?.eval(t))).collect::<hypdeconv::Result<Vec<f64>>>()?;
    Ok(Profile { r, p })
}

fn to_js<T: Serialize>(v: hypdeconv::Result<T>) -> Result<String, JsError> {
    let v = v.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = heatCurves)]
pub fn heat_curves_js(rho: f64, rho_eps: f64, r_max: f64, points: usize) -> Result<String, JsError> {
    to_js(heat_curves(rho, rho_eps, r_max, points))
}

#[wasm_bindgen(js_name = simulateAndDeconvolve)]
pub fn simulate_and_deconvolve_js(n: usize, rho: f64, rho_eps: f64, seed: u32, cutoff: f64, r_max: f64) -> Result<String, JsError> {
    to_js(simulate_and_deconvolve(n, rho, rho_eps, seed as u64, cutoff, r_max))
}

#[wasm_bindgen(js_name = conicalProfile)]
pub fn conical_profile_js(t: f64, r_max: f64, points: usize) -> Result<String, JsError> {
    to_js(conical_profile(t, r_max, points))
}

/// Rate cutoff for the current settings, shown next to the CV choice.
#[wasm_bindgen(js_name = rateCutoff)]
pub fn rate_cutoff_js(n: usize, rho_eps: f64) -> Result<f64, JsError> {
    let error = ErrorModel::gaussian(rho_eps).map_err(|e| JsError::new(&e.to_string()))?;
    default_rate_cutoff(&error, n).map_err(|e| JsError::new(&e.to_string()))
}
