//! The Möbius deconvolution estimator and its tuning.
//!
//! With S(t) = (1/n) Σ Im(Y_j)^{1/2 − it} and the error transform E(t), the
//! invariant estimator is
//!
//! ```text
//! f̂(e^{−r} i) = (1/4π) ∫_{−T}^{T} (S(t)/E(t)) P_{−1/2+it}(cosh r) t tanh(πt) dt.
//! ```
//!
//! Its transform is Re(S/E)·1_{|t|<T}; squared L² distances to a known
//! truth are computed on the spectral side, which avoids the slowly decaying
//! r-tail of the truncated estimate.

use crate::distributions::ErrorModel;
use crate::error::{Error, Result};
use crate::geometry::{mobius_apply, HPoint, SL2};
use crate::hft::{inverse_values, spectral_weight, EmpiricalSpectrum, RadialDensity, Sample, SpectralFunction, SpectralGrid};
use crate::par;
use crate::quad::NodeSet;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};
use std::io::Write;

/// Largest admissible 1/E(t) inside the band.
pub const MAX_AMPLIFICATION: f64 = 1e15;

#[derive(Debug, Clone)]
pub struct DeconvConfig {
    pub cutoff: f64,
    pub error: ErrorModel,
    /// Quadrature nodes on [0, T] (rounded up to whole 12-node panels).
    pub t_nodes: usize,
    pub r_grid: Vec<f64>,
    /// Clip negative values and rescale to unit mass.
    pub project_nonnegative: bool,
}

impl DeconvConfig {
    /// Two 12-node panels per unit of T.
    pub fn new(cutoff: f64, error: ErrorModel, r_grid: Vec<f64>) -> Result<Self> {
        let t_nodes = 24 * (cutoff.ceil() as usize).max(1);
        let cfg = Self { cutoff, error, t_nodes, r_grid, project_nonnegative: false };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff > 0.0) || !self.cutoff.is_finite() {
            return Err(Error::InvalidParameter(format!("cutoff must be positive, got {}", self.cutoff)));
        }
        if self.t_nodes == 0 {
            return Err(Error::InvalidParameter("t_nodes must be positive".into()));
        }
        if self.r_grid.first().copied() != Some(0.0) || !self.r_grid.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Grid("r_grid must be ascending and start at 0".into()));
        }
        Ok(())
    }

    pub fn spectral_grid(&self) -> Result<SpectralGrid> {
        let panels = self.t_nodes.div_ceil(12).max(1);
        SpectralGrid::gauss(self.cutoff, self.cutoff / panels as f64, 12)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub amplification_max: f64,
    pub n: usize,
}

#[derive(Debug, Clone)]
pub struct DeconvResult {
    pub estimate: RadialDensity,
    pub cutoff_used: f64,
    pub diagnostics: Diagnostics,
    /// S(t)/E(t) on the band.
    pub quotient: SpectralFunction,
}

impl DeconvResult {
    /// Writes `r,estimate` or `r,estimate,truth`.
    pub fn to_csv<W: Write>(&self, w: W, truth: Option<&RadialDensity>) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        match truth {
            Some(_) => out.write_record(["r", "estimate", "truth"])?,
            None => out.write_record(["r", "estimate"])?,
        }
        for (&r, &v) in self.estimate.r().iter().zip(self.estimate.values()) {
            let mut row = vec![r.to_string(), v.to_string()];
            if let Some(tr) = truth {
                row.push(tr.eval(r).to_string());
            }
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

/// max 1/E(t) over the grid nodes, t = 0 and t = ±T; errors beyond
/// [`MAX_AMPLIFICATION`].
pub fn amplification_max(error: &ErrorModel, grid: &SpectralGrid) -> Result<f64> {
    let t_max = grid.t_max();
    let mut worst = 0.0f64;
    for &t in grid.t().iter().chain([0.0, t_max].iter()) {
        let e = error.spectral(t);
        let amp = if e > 0.0 { 1.0 / e } else { f64::INFINITY };
        if !(amp <= MAX_AMPLIFICATION) {
            return Err(Error::AmplificationOverflow { t, amplification: amp });
        }
        worst = worst.max(amp);
    }
    Ok(worst)
}

fn quotient(spectrum: &EmpiricalSpectrum, error: &ErrorModel, grid: &SpectralGrid) -> Result<SpectralFunction> {
    let values = par::map(grid.t(), |&t| spectrum.eval(t) / error.spectral(t));
    SpectralFunction::new(grid.clone(), values)
}

/// The invariant estimator on `cfg.r_grid`.
pub fn estimate_radial(sample: &Sample, cfg: &DeconvConfig) -> Result<DeconvResult> {
    estimate_from_spectrum(&EmpiricalSpectrum::invariant(sample), cfg)
}

pub fn estimate_from_spectrum(spectrum: &EmpiricalSpectrum, cfg: &DeconvConfig) -> Result<DeconvResult> {
    cfg.validate()?;
    let grid = cfg.spectral_grid()?;
    let amplification = amplification_max(&cfg.error, &grid)?;
    let q = quotient(spectrum, &cfg.error, &grid)?;
    let values = inverse_values(&q, &cfg.r_grid)?;
    let mut estimate = RadialDensity::new(cfg.r_grid.clone(), values)?;
    if cfg.project_nonnegative {
        estimate = project_nonnegative(&estimate)?;
    }
    Ok(DeconvResult {
        estimate,
        cutoff_used: cfg.cutoff,
        diagnostics: Diagnostics { amplification_max: amplification, n: spectrum.len() },
        quotient: q,
    })
}

/// Clips negative values to 0 and rescales to unit mass.
pub fn project_nonnegative(f: &RadialDensity) -> Result<RadialDensity> {
    let clipped = f.map(|_, v| v.max(0.0))?;
    let mass = clipped.mass();
    if !(mass > 0.0) {
        return Err(Error::Negative { min: 0.0, context: "estimate has no positive mass to renormalize".into() });
    }
    clipped.map(|_, v| v / mass)
}

/// The full (k-dependent) estimator
///
/// ```text
/// f̂(z) = ∫_{|t|<T} ∫₀^{2π} (S(t, u)/E(t)) Im(k_u z)^{1/2+it} dτ,   dτ = t tanh(πt) dt du / 8π²
/// ```
///
/// with S(t, u) = (1/n) Σ Im(k_u Y_j)^{1/2−it}. The u-integrand has period π and
/// is integrated by the trapezoidal rule on `k_nodes` points.
#[derive(Debug, Clone)]
pub struct PointwiseEstimator {
    angles: Vec<f64>,
    t: Vec<f64>,
    /// w_k t tanh(πt) × multiplicity, for t_k ≥ 0.
    weights: Vec<f64>,
    /// Q[m][k] = S(t_k, u_m)/E(t_k).
    q: Vec<Vec<Complex64>>,
}

impl PointwiseEstimator {
    pub fn new(sample: &Sample, cfg: &DeconvConfig, k_nodes: usize) -> Result<Self> {
        if k_nodes < 32 {
            return Err(Error::InvalidParameter(format!("k_nodes must be at least 32, got {k_nodes}")));
        }
        cfg.validate()?;
        let grid = cfg.spectral_grid()?;
        amplification_max(&cfg.error, &grid)?;
        let start = grid.len() / 2;
        let t: Vec<f64> = grid.t()[start..].to_vec();
        let weights: Vec<f64> = grid.weights()[start..]
            .iter()
            .zip(&t)
            .map(|(&w, &tk)| if tk == 0.0 { w } else { 2.0 * w } * spectral_weight(tk))
            .collect();
        let angles: Vec<f64> = (0..k_nodes).map(|m| PI * m as f64 / k_nodes as f64).collect();
        let inv_e: Vec<f64> = t.iter().map(|&tk| 1.0 / cfg.error.spectral(tk)).collect();
        let q = par::map(&angles, |&u| {
            let spec = EmpiricalSpectrum::at_angle(sample, u);
            t.iter().zip(&inv_e).map(|(&tk, &ie)| spec.eval(tk) * ie).collect::<Vec<_>>()
        });
        Ok(Self { angles, t, weights, q })
    }

    pub fn eval(&self, z: HPoint) -> f64 {
        let mut acc = 0.0;
        for (m, &u) in self.angles.iter().enumerate() {
            let y = mobius_apply(&SL2::rotation(u), z).im();
            let (sy, ly) = (y.sqrt(), y.ln());
            for (k, &tk) in self.t.iter().enumerate() {
                let kernel = Complex64::from_polar(sy, tk * ly);
                acc += self.weights[k] * (self.q[m][k] * kernel).re;
            }
        }
        acc / (4.0 * PI * self.angles.len() as f64)
    }
}

pub fn estimate_pointwise(sample: &Sample, z: HPoint, cfg: &DeconvConfig, k_nodes: usize) -> Result<f64> {
    Ok(PointwiseEstimator::new(sample, cfg, k_nodes)?.eval(z))
}

/// T = (γ/2 ln n − ηγ/2 ln ln n)^{1/β}, with η defaulting to 2(α+1)/β.
pub fn rate_cutoff(n: usize, beta: f64, gamma: f64, alpha: f64, eta: Option<f64>) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("the rate cutoff needs n ≥ 3, got {n}")));
    }
    if !(beta > 0.0) || !(gamma > 0.0) {
        return Err(Error::InvalidParameter("β and γ must be positive".into()));
    }
    let eta = eta.unwrap_or(2.0 * (alpha + 1.0) / beta);
    let ln = (n as f64).ln();
    let radicand = 0.5 * gamma * ln - 0.5 * eta * gamma * ln.ln();
    if !(radicand > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "rate cutoff radicand {radicand} ≤ 0: n = {n} is too small for η = {eta}"
        )));
    }
    Ok(radicand.powf(1.0 / beta))
}

/// Gaussian errors: T² = (ln n − η ln ln n)/(4ρ).
pub fn rate_cutoff_gaussian(n: usize, rho: f64, eta: f64) -> Result<f64> {
    if n < 3 || !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!("need n ≥ 3 and ρ > 0, got n = {n}, ρ = {rho}")));
    }
    let ln = (n as f64).ln();
    let radicand = (ln - eta * ln.ln()) / (4.0 * rho);
    if !(radicand > 0.0) {
        return Err(Error::InvalidParameter(format!("n = {n} is too small for η = {eta}")));
    }
    Ok(radicand.sqrt())
}

/// The simplified form T = ((1/4ρ) ln n)^{1/4} used for the Gaussian simulations.
pub fn rate_cutoff_quartic(n: usize, rho: f64) -> Result<f64> {
    if n < 2 || !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!("need n ≥ 2 and ρ > 0, got n = {n}, ρ = {rho}")));
    }
    Ok(((n as f64).ln() / (4.0 * rho)).powf(0.25))
}

/// Laplace errors: T = n^{1/(2(α+1))}.
pub fn rate_cutoff_laplace(n: usize, alpha: f64) -> Result<f64> {
    if n < 1 || !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("need n ≥ 1 and α > 0, got n = {n}, α = {alpha}")));
    }
    Ok((n as f64).powf(1.0 / (2.0 * (alpha + 1.0))))
}

/// The cutoff schedule implied by an error model: the quartic form for
/// Gaussian errors and the power law for Laplace errors.
pub fn default_rate_cutoff(error: &ErrorModel, n: usize) -> Result<f64> {
    match error {
        ErrorModel::Gaussian { rho } => rate_cutoff_quartic(n, *rho),
        ErrorModel::Laplace { alpha, .. } => rate_cutoff_laplace(n, *alpha),
        ErrorModel::Custom(spec) => Ok(spec.grid().t_max()),
    }
}

/// Cross-validation grid for `n` observations: [`default_t_grid`] around
/// T² = ln n/(4ρ) for Gaussian errors and n^{1/(2(α+1))} for Laplace errors.
pub fn cv_t_grid(error: &ErrorModel, n: usize) -> Result<Vec<f64>> {
    let t_rate = match error {
        ErrorModel::Gaussian { rho } => rate_cutoff_gaussian(n.max(3), *rho, 0.0)?,
        ErrorModel::Laplace { alpha, .. } => rate_cutoff_laplace(n, *alpha)?,
        ErrorModel::Custom(spec) => spec.grid().t_max() - 2.0,
    };
    if !(t_rate + 2.0 > 0.5) {
        return Err(Error::Grid(format!("cutoff grid [0.5, {}] is empty", t_rate + 2.0)));
    }
    Ok(default_t_grid(t_rate))
}

/// Which leave-one-out term enters the CV criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LooWeight {
    /// Σ_l f̂^{(−l)}-terms with 1/E² so that the cross term estimates ⟨f̂, f_X⟩.
    Unbiased,
    /// The single 1/E of f̂^{(−l)}(Y_l) read literally; its cross term
    /// estimates ⟨f̂, f_Y⟩ instead.
    Displayed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CvForm {
    /// Heights Im(Y_j) only (the u-integral contributes a constant).
    Invariant,
    /// Average over `k_nodes` rotations k_u, u ∈ [0, π).
    General { k_nodes: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub form: CvForm,
    pub weight: LooWeight,
    /// Largest Gauss–Legendre panel width on the t-axis.
    pub panel_width: f64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self { form: CvForm::Invariant, weight: LooWeight::Unbiased, panel_width: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub selected: f64,
    pub t_grid: Vec<f64>,
    pub criterion: Vec<f64>,
}

/// 40 log-spaced cutoffs in [0.5, t_rate + 2].
pub fn default_t_grid(t_rate: f64) -> Vec<f64> {
    let (lo, hi) = (0.5f64, t_rate + 2.0);
    (0..40)
        .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / 39.0).exp())
        .collect()
}

/// Composite nodes on [0, max T] with every cutoff a panel break, so the
/// criterion for each T is a prefix sum.
fn cv_nodes(t_grid: &[f64], panel_width: f64) -> (NodeSet, Vec<usize>) {
    let mut breaks = vec![0.0];
    let mut ends = Vec::with_capacity(t_grid.len());
    let mut set = NodeSet::default();
    for &t in t_grid {
        let a = *breaks.last().unwrap();
        if t > a {
            let seg = NodeSet::uniform_panels(a, t, panel_width, 8);
            set.nodes.extend(seg.nodes);
            set.weights.extend(seg.weights);
            breaks.push(t);
        }
        ends.push(set.len());
    }
    (set, ends)
}

fn criterion_integrand(spectrum: &EmpiricalSpectrum, error: &ErrorModel, t: f64, weight: LooWeight) -> f64 {
    let n = spectrum.len() as f64;
    let s2 = spectrum.eval(t).norm_sqr();
    let e = error.spectral(t);
    let loo_pairs = (n * n * s2 - spectrum.sum_heights()) / (n * (n - 1.0));
    let cross = match weight {
        LooWeight::Unbiased => loo_pairs / (e * e),
        LooWeight::Displayed => loo_pairs / e,
    };
    (s2 / (e * e) - 2.0 * cross) * spectral_weight(t)
}

fn criterion_curve(spectrum: &EmpiricalSpectrum, error: &ErrorModel, nodes: &NodeSet, ends: &[usize], weight: LooWeight) -> Vec<f64> {
    let vals = par::map(&nodes.nodes, |&t| criterion_integrand(spectrum, error, t, weight));
    let mut prefix = Vec::with_capacity(vals.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for (v, w) in vals.iter().zip(&nodes.weights) {
        acc += v * w;
        prefix.push(acc);
    }
    // (1/4π) over [−T, T] = (1/2π) over [0, T]
    ends.iter().map(|&e| prefix[e] / TAU).collect()
}

/// Cross-validated cutoff: grid minimizer of ‖f̂_T‖² − (2/n) Σ_l f̂_T^{(−l)}(Y_l).
pub fn cv_cutoff(sample: &Sample, error: &ErrorModel, t_grid: &[f64], cfg: &CvConfig) -> Result<CvResult> {
    if sample.len() < 2 {
        return Err(Error::InvalidParameter("cross-validation needs at least two observations".into()));
    }
    if t_grid.is_empty() || !t_grid.windows(2).all(|w| w[1] > w[0]) || !(t_grid[0] > 0.0) {
        return Err(Error::Grid("cutoff grid must be positive and strictly increasing".into()));
    }
    let probe = SpectralGrid::from_nodes(vec![-t_grid[t_grid.len() - 1], 0.0, t_grid[t_grid.len() - 1]])?;
    amplification_max(error, &probe)?;
    let (nodes, ends) = cv_nodes(t_grid, cfg.panel_width);
    let criterion = match cfg.form {
        CvForm::Invariant => criterion_curve(&EmpiricalSpectrum::invariant(sample), error, &nodes, &ends, cfg.weight),
        CvForm::General { k_nodes } => {
            if k_nodes == 0 {
                return Err(Error::InvalidParameter("k_nodes must be positive".into()));
            }
            let mut total = vec![0.0; t_grid.len()];
            for m in 0..k_nodes {
                let spec = EmpiricalSpectrum::at_angle(sample, PI * m as f64 / k_nodes as f64);
                for (acc, v) in total.iter_mut().zip(criterion_curve(&spec, error, &nodes, &ends, cfg.weight)) {
                    *acc += v / k_nodes as f64;
                }
            }
            total
        }
    };
    let (best, _) = criterion
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
    let flat = criterion.iter().all(|&v| (v - criterion[0]).abs() <= 1e-14 * criterion[0].abs().max(1e-300));
    if flat && criterion.len() > 1 {
        log::warn!("cross-validation criterion is flat; using the smallest cutoff");
    }
    let selected = if flat { t_grid[0] } else { t_grid[best] };
    Ok(CvResult { selected, t_grid: t_grid.to_vec(), criterion })
}

/// The invariant CV criterion at one cutoff from the O(n²) double sum over
/// pairs j ≠ l of Im(Y_j)^{1/2−it} Im(Y_l)^{1/2+it}.
pub fn cv_criterion_brute_force(sample: &Sample, error: &ErrorModel, cutoff: f64, weight: LooWeight, panel_width: f64) -> f64 {
    let nodes = NodeSet::uniform_panels(0.0, cutoff, panel_width, 8);
    let ys: Vec<f64> = sample.points().iter().map(|p| p.im()).collect();
    let n = ys.len() as f64;
    let mut total = 0.0;
    for (&t, &w) in nodes.nodes.iter().zip(&nodes.weights) {
        let terms: Vec<Complex64> = ys.iter().map(|&y| Complex64::new(y, 0.0).powc(Complex64::new(0.5, -t))).collect();
        let s: Complex64 = terms.iter().sum::<Complex64>() / n;
        let mut pairs = 0.0;
        for (j, a) in terms.iter().enumerate() {
            for (l, b) in terms.iter().enumerate() {
                if j != l {
                    pairs += (a * b.conj()).re;
                }
            }
        }
        let e = error.spectral(t);
        let loo = pairs / (n * (n - 1.0));
        let cross = match weight {
            LooWeight::Unbiased => loo / (e * e),
            LooWeight::Displayed => loo / e,
        };
        total += w * (s.norm_sqr() / (e * e) - 2.0 * cross) * spectral_weight(t);
    }
    total / TAU
}

/// ∫ (est − truth)² dμ over the union of both grids (each density is zero
/// beyond its own grid).
pub fn mise(estimate: &RadialDensity, truth: &RadialDensity) -> f64 {
    let mut breaks: Vec<f64> = estimate.r().iter().chain(truth.r()).copied().collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    NodeSet::panels(&breaks, 6).integrate(|r| TAU * r.sinh() * (estimate.eval(r) - truth.eval(r)).powi(2))
}

/// ‖f̂ − f‖² from the spectral side: the band part uses Re(S/E) − Hf on the
/// estimate's grid, the tail part ∫_{|t|>T} |Hf|² dτ uses its own panels up
/// to `tail_to`.
pub fn spectral_sq_distance<F: Fn(f64) -> f64>(quotient: &SpectralFunction, truth: F, tail_to: f64) -> f64 {
    let band = quotient
        .grid()
        .spectral_integral(|k, t| (quotient.values()[k].re - truth(t)).powi(2));
    band + spectral_tail(&truth, quotient.grid().t_max(), tail_to)
}

/// (1/2π) ∫_T^{tail_to} |Hf|² t tanh(πt) dt.
pub fn spectral_tail<F: Fn(f64) -> f64>(truth: &F, cutoff: f64, tail_to: f64) -> f64 {
    if tail_to <= cutoff {
        return 0.0;
    }
    NodeSet::uniform_panels(cutoff, tail_to, 0.5, 12).integrate(|t| truth(t).powi(2) * spectral_weight(t)) / TAU
}

/// Squared L² distance between two radial functions given by their real
/// transforms on a common symmetric grid.
pub fn spectral_sq_distance_between<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(a: F, b: G, t_max: f64) -> f64 {
    NodeSet::uniform_panels(0.0, t_max, 0.5, 12).integrate(|t| (a(t) - b(t)).powi(2) * spectral_weight(t)) / TAU
}

/// An error model with E ≡ 1 on |t| ≤ t_max (no deconvolution).
pub fn identity_error(t_max: f64) -> Result<ErrorModel> {
    let grid = SpectralGrid::from_nodes(vec![-t_max, 0.0, t_max])?;
    ErrorModel::custom(SpectralFunction::from_real_fn(grid, |_| 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{gaussian_spectral, sample_gaussian_h};
    use crate::hft::{forward_radial, radial_grid};
    use crate::specfun::{conical_p, ConicalEvalConfig};
    use approx::assert_abs_diff_eq;

    fn gaussian_sample(n: usize, seed: u64) -> Sample {
        sample_gaussian_h(0.15, n, seed).unwrap()
    }

    #[test]
    fn rate_examples() {
        assert_abs_diff_eq!(rate_cutoff_quartic(100, 0.05).unwrap(), 2.19, epsilon = 0.005);
        assert_abs_diff_eq!(rate_cutoff_quartic(1000, 0.05).unwrap(), 2.42, epsilon = 0.005);
        assert_abs_diff_eq!(rate_cutoff_quartic(10_000, 0.05).unwrap(), 2.61, epsilon = 0.005);
        assert_abs_diff_eq!(rate_cutoff_laplace(4096, 2.0).unwrap(), 4.0, epsilon = 1e-12);
        assert!(rate_cutoff(2, 2.0, 20.0, 1.0, None).is_err());
        assert!(rate_cutoff(5, 2.0, 20.0, 1.0, Some(10.0)).is_err());
        // Gaussian: β = 2, γ = 1/ρ
        let a = rate_cutoff(1000, 2.0, 20.0, 1.0, Some(0.0)).unwrap();
        assert_abs_diff_eq!(a, (10.0 * 1000f64.ln()).sqrt(), epsilon = 1e-12);
        let g = rate_cutoff_gaussian(1000, 0.05, 0.0).unwrap();
        assert_abs_diff_eq!(g, (1000f64.ln() / 0.2).sqrt(), epsilon = 1e-12);
        assert!(rate_cutoff_gaussian(10_000, 0.05, 2.0).unwrap() > rate_cutoff_gaussian(1000, 0.05, 2.0).unwrap());
    }

    #[test]
    fn single_point_sample_matches_direct_quadrature() {
        let sample = Sample::new(vec![HPoint::I]).unwrap();
        let cfg = DeconvConfig::new(2.0, identity_error(10.0).unwrap(), radial_grid(2.0, 8)).unwrap();
        let res = estimate_radial(&sample, &cfg).unwrap();
        let conical = ConicalEvalConfig::default();
        for (&r, &v) in res.estimate.r().iter().zip(res.estimate.values()) {
            let direct = crate::quad::adaptive(
                |t: f64| conical_p(t, r, &conical).unwrap() * spectral_weight(t),
                0.0,
                2.0,
                1e-14,
                1e-12,
            )
            .unwrap()
                / TAU;
            assert_abs_diff_eq!(v, direct, epsilon = 1e-10);
        }
        assert_eq!(res.diagnostics.n, 1);
        assert_eq!(res.diagnostics.amplification_max, 1.0);
    }

    #[test]
    fn amplification_guard_refuses() {
        let sample = Sample::new(vec![HPoint::I]).unwrap();
        let cfg = DeconvConfig::new(40.0, ErrorModel::gaussian(0.05).unwrap(), radial_grid(1.0, 4)).unwrap();
        assert!(matches!(estimate_radial(&sample, &cfg), Err(Error::AmplificationOverflow { .. })));
    }

    #[test]
    fn estimator_is_linear_in_the_empirical_measure() {
        let a = gaussian_sample(300, 1);
        let b = gaussian_sample(100, 2);
        let both = Sample::new(a.points().iter().chain(b.points()).copied().collect()).unwrap();
        let cfg = DeconvConfig::new(2.0, ErrorModel::gaussian(0.05).unwrap(), radial_grid(3.0, 30)).unwrap();
        let fa = estimate_radial(&a, &cfg).unwrap().estimate;
        let fb = estimate_radial(&b, &cfg).unwrap().estimate;
        let fab = estimate_radial(&both, &cfg).unwrap().estimate;
        for k in 0..fab.values().len() {
            let mix = (300.0 * fa.values()[k] + 100.0 * fb.values()[k]) / 400.0;
            assert!((fab.values()[k] - mix).abs() < 1e-12 * (1.0 + mix.abs()));
        }
    }

    #[test]
    fn truncation_identity_in_weak_form() {
        // ⟨f̂, g_ρ⟩ computed in r equals (1/4π)∫_{−T}^{T} Re(S/E) e^{−(t²+1/4)ρ} dτ-weight
        let sample = gaussian_sample(200, 3);
        let cfg = DeconvConfig::new(2.5, ErrorModel::gaussian(0.05).unwrap(), radial_grid(12.0, 1200)).unwrap();
        let res = estimate_radial(&sample, &cfg).unwrap();
        let rho = 0.3;
        let law = crate::distributions::gaussian_law(rho).unwrap();
        let r_side = res
            .estimate
            .nodes(6)
            .integrate(|r| TAU * r.sinh() * res.estimate.eval(r) * law.density().eval(r));
        let q = &res.quotient;
        let s_side = q.grid().spectral_integral(|k, t| q.values()[k].re * gaussian_spectral(rho, t));
        assert!((r_side - s_side).abs() < 1e-6 * s_side.abs().max(1e-3), "{r_side} vs {s_side}");
    }

    #[test]
    fn quotient_is_conjugate_symmetric() {
        let sample = gaussian_sample(200, 4);
        let cfg = DeconvConfig::new(2.0, ErrorModel::gaussian(0.05).unwrap(), radial_grid(2.0, 4)).unwrap();
        let q = estimate_radial(&sample, &cfg).unwrap().quotient;
        for k in 0..q.len() {
            let m = q.len() - 1 - k;
            assert!((q.values()[k] - q.values()[m].conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn pointwise_matches_radial_for_the_pole_sample() {
        let sample = Sample::new(vec![HPoint::I]).unwrap();
        let cfg = DeconvConfig::new(3.0, ErrorModel::gaussian(0.05).unwrap(), radial_grid(1.0, 4)).unwrap();
        let radial = estimate_radial(&sample, &cfg).unwrap().estimate.values()[0];
        let point = estimate_pointwise(&sample, HPoint::I, &cfg, 32).unwrap();
        assert_abs_diff_eq!(radial, point, epsilon = 1e-10);
        assert!(estimate_pointwise(&sample, HPoint::I, &cfg, 16).is_err());
    }

    #[test]
    fn pointwise_is_rotation_consistent_on_symmetric_samples() {
        let k_nodes = 32;
        let base = [HPoint::new(0.3, 0.8).unwrap(), HPoint::new(-0.5, 1.4).unwrap()];
        let mut pts = Vec::new();
        for m in 0..k_nodes {
            let k = SL2::rotation(PI * m as f64 / k_nodes as f64);
            pts.extend(base.iter().map(|&p| mobius_apply(&k, p)));
        }
        let sample = Sample::new(pts).unwrap();
        let cfg = DeconvConfig::new(2.0, ErrorModel::gaussian(0.05).unwrap(), radial_grid(1.0, 4)).unwrap();
        let est = PointwiseEstimator::new(&sample, &cfg, k_nodes).unwrap();
        let z = HPoint::new(0.2, 0.6).unwrap();
        let zr = mobius_apply(&SL2::rotation(PI / k_nodes as f64), z);
        assert!((est.eval(z) - est.eval(zr)).abs() < 1e-10 * est.eval(z).abs().max(1.0));
    }

    #[test]
    fn cv_fast_path_matches_brute_force() {
        let sample = gaussian_sample(60, 5);
        let error = ErrorModel::gaussian(0.05).unwrap();
        let grid = [1.0, 2.0, 3.0];
        for weight in [LooWeight::Unbiased, LooWeight::Displayed] {
            let cfg = CvConfig { weight, ..CvConfig::default() };
            let fast = cv_cutoff(&sample, &error, &grid, &cfg).unwrap();
            for (i, &t) in grid.iter().enumerate() {
                let slow = cv_criterion_brute_force(&sample, &error, t, weight, 0.25);
                assert!((fast.criterion[i] - slow).abs() < 1e-10 * slow.abs().max(1e-6), "{weight:?} T={t}");
            }
        }
    }

    #[test]
    fn cv_single_grid_and_relabeling() {
        let sample = gaussian_sample(50, 6);
        let error = ErrorModel::gaussian(0.05).unwrap();
        let one = cv_cutoff(&sample, &error, &[1.7], &CvConfig::default()).unwrap();
        assert_eq!(one.selected, 1.7);
        let grid = default_t_grid(2.4);
        let a = cv_cutoff(&sample, &error, &grid, &CvConfig::default()).unwrap();
        let mut rev = sample.points().to_vec();
        rev.reverse();
        let b = cv_cutoff(&Sample::new(rev).unwrap(), &error, &grid, &CvConfig::default()).unwrap();
        assert_eq!(a.selected, b.selected);
        let single = Sample::new(vec![HPoint::I]).unwrap();
        assert!(cv_cutoff(&single, &error, &grid, &CvConfig::default()).is_err());
    }

    #[test]
    fn general_cv_form_with_one_angle_is_the_invariant_form() {
        let sample = gaussian_sample(80, 7);
        let error = ErrorModel::gaussian(0.05).unwrap();
        let grid = [1.0, 2.0];
        let inv = cv_cutoff(&sample, &error, &grid, &CvConfig::default()).unwrap();
        let cfg = CvConfig { form: CvForm::General { k_nodes: 1 }, ..CvConfig::default() };
        let gen = cv_cutoff(&sample, &error, &grid, &cfg).unwrap();
        assert_eq!(inv.criterion, gen.criterion);
        let cfg8 = CvConfig { form: CvForm::General { k_nodes: 8 }, ..CvConfig::default() };
        assert!(cv_cutoff(&sample, &error, &grid, &cfg8).unwrap().criterion.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn mise_examples() {
        let f = RadialDensity::from_fn(radial_grid(3.0, 30), |r| (-r).exp()).unwrap();
        assert_eq!(mise(&f, &f), 0.0);
        let g = f.map(|_, v| 1.1 * v).unwrap();
        assert!(mise(&f, &g) > 0.0);
    }

    #[test]
    fn spectral_and_radial_distances_agree_on_smooth_pairs() {
        let a = crate::distributions::gaussian_law(0.1).unwrap();
        let b = crate::distributions::gaussian_law(0.15).unwrap();
        let r_side = mise(a.density(), b.density());
        let s_side = spectral_sq_distance_between(|t| gaussian_spectral(0.1, t), |t| gaussian_spectral(0.15, t), 40.0);
        assert!((r_side - s_side).abs() < 1e-3 * s_side, "{r_side} vs {s_side}");
        // the transform of a tabulated density reproduces the closed form
        let spec = forward_radial(a.density(), &SpectralGrid::standard(3.0).unwrap()).unwrap();
        assert!((spec.values()[0].re - gaussian_spectral(0.1, spec.t()[0])).abs() < 1e-3);
    }

    #[test]
    fn nonnegative_projection_has_unit_mass() {
        let f = RadialDensity::from_fn(radial_grid(3.0, 60), |r| (-(r * r)).exp() - 0.05).unwrap();
        let p = project_nonnegative(&f).unwrap();
        assert!(p.values().iter().all(|&v| v >= 0.0));
        assert!((p.mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let sample = Sample::new(vec![HPoint::I]).unwrap();
        let cfg = DeconvConfig::new(1.0, ErrorModel::gaussian(0.05).unwrap(), radial_grid(1.0, 2)).unwrap();
        let res = estimate_radial(&sample, &cfg).unwrap();
        let mut buf = Vec::new();
        res.to_csv(&mut buf, Some(&res.estimate)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("r,estimate,truth\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
