//! Invariant laws on ℍ: the hyperbolic Gaussian (heat kernel), the hyperbolic
//! Laplace law, and the heavy-tailed test density f₀; samplers on ℍ and on
//! SL(2,ℝ); and the corruption model Y = M_ε(X).
//!
//! The Gaussian radial profile comes from the polar inversion formula
//!
//! ```text
//! g_ρ(e^{−r} i) = √2 e^{−ρ/4} / (4πρ)^{3/2} ∫_r^∞ b e^{−b²/4ρ} / √(cosh b − cosh r) db
//! ```
//!
//! evaluated with b = r + v². The normalized Laplace transform
//! (τ / (τ + 1/4 + t²))^α equals E[e^{−ρ(t² + 1/4)}] for ρ ~ Gamma(α, rate τ),
//! so for τ > 0 the Laplace law is a Gamma mixture of Gaussians; its density,
//! CDF and sampler are built from that mixture.

use crate::error::{Error, Result};
use crate::geometry::{mobius_apply, sl2_from_polar, HPoint, SL2Polar, SL2};
use crate::hft::{forward_radial, inverse_values, RadialDensity, Sample, SpectralFunction, SpectralGrid};
use crate::interp::Pchip;
use crate::par;
use crate::quad::{adaptive, GaussLegendre, NodeSet};
use crate::rng;
use rand::Rng;
use std::f64::consts::{PI, SQRT_2, TAU};
use std::fmt;
use std::str::FromStr;

/// e^{−(t² + 1/4)ρ}.
pub fn gaussian_spectral(rho: f64, t: f64) -> f64 {
    (-(t * t + 0.25) * rho).exp()
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidParameter(format!("Gaussian dispersion must be positive, got {rho}")));
    }
    Ok(())
}

/// g_ρ(e^{−r} i).
pub fn gaussian_radial(rho: f64, r: f64) -> Result<f64> {
    check_rho(rho)?;
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("radius must be nonnegative, got {r}")));
    }
    if r * r / (4.0 * rho) > 600.0 {
        return Ok(0.0);
    }
    let v_max = ((r * r + 240.0 * rho).sqrt() - r).sqrt();
    let integrand = |v: f64| {
        if v == 0.0 {
            return if r > 0.0 { 2.0 * r * (-r * r / (4.0 * rho)).exp() / r.sinh().sqrt() } else { 0.0 };
        }
        let v2 = v * v;
        let b = r + v2;
        let denom = (2.0 * (r + 0.5 * v2).sinh() * (0.5 * v2).sinh()).sqrt();
        b * (-b * b / (4.0 * rho)).exp() * 2.0 * v / denom
    };
    let integral = adaptive(integrand, 0.0, v_max, 1e-300, 1e-11)?;
    Ok(SQRT_2 * (-0.25 * rho).exp() / (4.0 * PI * rho).powf(1.5) * integral)
}

/// g_ρ tabulated on `r_grid`.
pub fn gaussian_radial_density(rho: f64, r_grid: &[f64]) -> Result<RadialDensity> {
    check_rho(rho)?;
    let values: Result<Vec<f64>> = par::map(r_grid, |&r| gaussian_radial(rho, r)).into_iter().collect();
    RadialDensity::new(r_grid.to_vec(), values?)
}

/// Radius beyond which g̃_ρ carries negligible mass (< 1e−10).
pub fn gaussian_r_max(rho: f64) -> f64 {
    rho + 12.0 * rho.sqrt()
}

/// A radial law with its tabulated density, CDF of r, and inverse CDF.
#[derive(Debug, Clone)]
pub struct RadialLaw {
    density: RadialDensity,
    cdf: Pchip,
    quantile: Pchip,
    raw_mass: f64,
}

impl RadialLaw {
    /// CDF by cumulative Gauss–Legendre quadrature of f̃ over the grid.
    pub fn from_density(density: RadialDensity) -> Result<Self> {
        let rule = GaussLegendre::new(4);
        let r = density.r();
        let mut cdf = Vec::with_capacity(r.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in r.windows(2) {
            acc += rule.integrate(w[0], w[1], |x| density.tilde(x));
            cdf.push(acc);
        }
        Self::from_parts(density, cdf)
    }

    fn from_parts(density: RadialDensity, cdf: Vec<f64>) -> Result<Self> {
        let raw_mass = *cdf.last().expect("nonempty grid");
        if !(raw_mass > 0.0) {
            return Err(Error::Grid("radial law has no mass on its grid".into()));
        }
        let r = density.r().to_vec();
        let normalized: Vec<f64> = cdf.iter().map(|c| (c / raw_mass).clamp(0.0, 1.0)).collect();
        // the quantile interpolant needs strictly increasing probabilities
        let mut p = vec![0.0];
        let mut q = vec![0.0];
        for (&c, &x) in normalized.iter().zip(&r).skip(1) {
            if c > p.last().unwrap() + 1e-15 {
                p.push(c);
                q.push(x);
            }
        }
        let cdf = Pchip::new(r, normalized)?;
        let quantile = Pchip::new(p, q)?;
        Ok(Self { density, cdf, quantile, raw_mass })
    }

    pub fn density(&self) -> &RadialDensity {
        &self.density
    }

    /// ∫ f̃ dr as tabulated, before normalization.
    pub fn raw_mass(&self) -> f64 {
        self.raw_mass
    }

    /// P(d(X, i) ≤ r).
    pub fn cdf(&self, r: f64) -> f64 {
        self.cdf.eval(r)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        self.quantile.eval(p)
    }

    pub fn sample_radii(&self, n: usize, seed: u64) -> Vec<f64> {
        rng::draws(n, seed, |g| self.quantile(g.gen::<f64>()))
    }

    /// X = k_u(e^{−r} i) with r from the law and u uniform on [0, 2π).
    pub fn sample_h(&self, n: usize, seed: u64) -> Result<Sample> {
        check_n(n)?;
        let pts = rng::draws(n, seed, |g| {
            let r = self.quantile(g.gen::<f64>());
            let u = g.gen::<f64>() * TAU;
            mobius_apply(&SL2::rotation(u), HPoint::on_axis(r))
        });
        Sample::new(pts)
    }

    /// ε = k_u R_r k_{u′} with r from the law and u, u′ independent uniform.
    pub fn sample_sl2(&self, n: usize, seed: u64) -> Result<Vec<SL2>> {
        check_n(n)?;
        Ok(rng::draws(n, seed, |g| {
            let r = self.quantile(g.gen::<f64>());
            let u = g.gen::<f64>() * TAU;
            let u2 = g.gen::<f64>() * TAU;
            sl2_from_polar(SL2Polar { u, r, u2 })
        }))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    Ok(())
}

fn gaussian_law_with(rho: f64, intervals: usize) -> Result<RadialLaw> {
    let grid: Vec<f64> = (0..=intervals)
        .map(|k| gaussian_r_max(rho) * k as f64 / intervals as f64)
        .collect();
    RadialLaw::from_density(gaussian_radial_density(rho, &grid)?)
}

/// The Gaussian law g_ρ tabulated to tail mass 1e−10.
pub fn gaussian_law(rho: f64) -> Result<RadialLaw> {
    gaussian_law_with(rho, 600)
}

pub fn sample_gaussian_h(rho: f64, n: usize, seed: u64) -> Result<Sample> {
    check_n(n)?;
    gaussian_law(rho)?.sample_h(n, seed)
}

pub fn sample_gaussian_sl2(rho: f64, n: usize, seed: u64) -> Result<Vec<SL2>> {
    check_n(n)?;
    gaussian_law(rho)?.sample_sl2(n, seed)
}

/// Y_j = M_{ε_j}(X_j).
pub fn apply_error(errors: &[SL2], xs: &Sample) -> Result<Sample> {
    if errors.len() != xs.len() {
        return Err(Error::InvalidParameter(format!(
            "{} errors for {} points",
            errors.len(),
            xs.len()
        )));
    }
    let pts = errors
        .iter()
        .zip(xs.points())
        .map(|(g, &x)| mobius_apply(g, x))
        .collect();
    Sample::new(pts)
}

/// (τ + 1/4 + t²)^{−α}, the unnormalized Laplace profile.
pub fn laplace_spectral(alpha: f64, tau: f64, t: f64) -> f64 {
    (tau + 0.25 + t * t).powf(-alpha)
}

fn check_laplace(alpha: f64, tau: f64) -> Result<()> {
    if !(alpha > 1.0) || !(tau > -0.25) || !alpha.is_finite() || !tau.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Laplace law needs α > 1 and τ > −1/4, got α = {alpha}, τ = {tau}"
        )));
    }
    Ok(())
}

fn check_laplace_normalizable(alpha: f64, tau: f64) -> Result<()> {
    check_laplace(alpha, tau)?;
    if tau <= 0.0 {
        return Err(Error::Domain(format!(
            "the Laplace law with τ = {tau} ≤ 0 has infinite mass and cannot be normalized"
        )));
    }
    Ok(())
}

/// (τ / (τ + 1/4 + t²))^α: the transform of the unit-mass Laplace density.
pub fn laplace_spectral_normalized(alpha: f64, tau: f64, t: f64) -> Result<f64> {
    check_laplace_normalizable(alpha, tau)?;
    Ok((tau / (tau + 0.25 + t * t)).powf(alpha))
}

/// The unit-mass Laplace law h_{α,τ} as a Gamma(α, rate τ) mixture of
/// Gaussians g_ρ. Requires τ > 0.
pub fn laplace_law(alpha: f64, tau: f64) -> Result<RadialLaw> {
    check_laplace_normalizable(alpha, tau)?;
    // mixing nodes in x = ln ρ; mass below ρ_lo is (τρ_lo)^α/Γ(α+1) < 1e−7
    let lo = (1e-7 / tau).ln();
    let hi = ((alpha + 40.0 + 10.0 * alpha.sqrt()) / tau).ln();
    let mix = NodeSet::uniform_panels(lo, hi, 2.0, 10);
    let raw: Vec<f64> = mix
        .nodes
        .iter()
        .zip(&mix.weights)
        .map(|(&x, &w)| {
            let rho = x.exp();
            w * (alpha * x - tau * rho).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    let rhos: Vec<f64> = mix.nodes.iter().map(|x| x.exp()).collect();
    let components: Result<Vec<RadialLaw>> =
        par::map(&rhos, |&rho| gaussian_law_with(rho, 300)).into_iter().collect();
    let components = components?;
    let r_max = gaussian_r_max(*rhos.last().unwrap());
    let n = 3000;
    let grid: Vec<f64> = (0..=n).map(|k| r_max * (k as f64 / n as f64).powi(2)).collect();
    let mut density = vec![0.0; grid.len()];
    let mut cdf = vec![0.0; grid.len()];
    for (law, w) in components.iter().zip(&raw) {
        let w = w / total;
        for (k, &r) in grid.iter().enumerate() {
            density[k] += w * law.density().eval(r) / law.raw_mass();
            cdf[k] += w * law.cdf(r);
        }
    }
    RadialLaw::from_parts(RadialDensity::new(grid, density)?, cdf)
}

/// The unit-mass Laplace density on `r_grid`, with the negativity check.
pub fn laplace_radial(alpha: f64, tau: f64, r_grid: &[f64]) -> Result<RadialDensity> {
    let law = laplace_law(alpha, tau)?;
    let values: Vec<f64> = r_grid.iter().map(|&r| law.density().eval(r)).collect();
    report_negativity(&values, "Laplace radial density")?;
    RadialDensity::new(r_grid.to_vec(), values)
}

/// Errors when min value < −1e−6.
pub fn report_negativity(values: &[f64], context: &str) -> Result<()> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -1e-6 {
        return Err(Error::Negative { min, context: context.to_string() });
    }
    Ok(())
}

/// Inverse transform of the unnormalized profile (τ + 1/4 + t²)^{−α},
/// truncated at |t| ≤ t_max. Valid for every τ > −1/4, including the
/// non-integrable (but square-integrable) cases τ ≤ 0.
pub fn laplace_radial_unnormalized(alpha: f64, tau: f64, r_grid: &[f64], t_max: f64) -> Result<RadialDensity> {
    check_laplace(alpha, tau)?;
    let spec = SpectralFunction::from_real_fn(SpectralGrid::standard(t_max)?, |t| laplace_spectral(alpha, tau, t));
    let values = inverse_values(&spec, r_grid)?;
    RadialDensity::new(r_grid.to_vec(), values)
}

pub fn sample_laplace(alpha: f64, tau: f64, n: usize, seed: u64) -> Result<Sample> {
    check_n(n)?;
    laplace_law(alpha, tau)?.sample_h(n, seed)
}

/// f₀(e^{−r} i) = ((a − 1)/2π) cosh(r)^{−a}.
pub fn f0_radial(a: f64, r: f64) -> Result<f64> {
    if !(a > 1.0) {
        return Err(Error::InvalidParameter(format!("f₀ needs a > 1, got {a}")));
    }
    Ok((a - 1.0) / TAU * r.cosh().powf(-a))
}

/// Radius beyond which f̃₀ carries mass < 1e−10.
pub fn f0_r_max(a: f64) -> f64 {
    (25.0 + a * 2f64.ln()) / (a - 1.0)
}

pub fn f0_density(a: f64, r_grid: &[f64]) -> Result<RadialDensity> {
    let values: Result<Vec<f64>> = r_grid.iter().map(|&r| f0_radial(a, r)).collect();
    RadialDensity::new(r_grid.to_vec(), values?)
}

/// ∫ (t² + 1/4)^α |F|² dτ, the squared Sobolev norm ‖Δ^{α/2} f‖².
pub fn sobolev_norm_spectral(spec: &SpectralFunction, alpha: f64) -> f64 {
    spec.grid()
        .spectral_integral(|k, t| (t * t + 0.25).powf(alpha) * spec.values()[k].norm_sqr())
}

/// Squared Sobolev norm of a radial density, transforming on |t| ≤ t_max.
pub fn sobolev_norm(f: &RadialDensity, alpha: f64, t_max: f64) -> Result<f64> {
    let spec = forward_radial(f, &SpectralGrid::standard(t_max)?)?;
    Ok(sobolev_norm_spectral(&spec, alpha))
}

/// The corruption law through its (real, even, positive) transform.
#[derive(Debug, Clone)]
pub enum ErrorModel {
    Gaussian { rho: f64 },
    Laplace { alpha: f64, tau: f64 },
    Custom(SpectralFunction),
}

impl ErrorModel {
    pub fn gaussian(rho: f64) -> Result<Self> {
        check_rho(rho)?;
        Ok(Self::Gaussian { rho })
    }

    pub fn laplace(alpha: f64, tau: f64) -> Result<Self> {
        check_laplace_normalizable(alpha, tau)?;
        Ok(Self::Laplace { alpha, tau })
    }

    /// A tabulated transform; it must be real-positive on its grid.
    pub fn custom(spec: SpectralFunction) -> Result<Self> {
        if let Some(v) = spec.values().iter().find(|v| !(v.re > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "custom error transform must be positive, found {v}"
            )));
        }
        Ok(Self::Custom(spec))
    }

    /// Hf_ε(1/2 + it).
    pub fn spectral(&self, t: f64) -> f64 {
        match self {
            Self::Gaussian { rho } => gaussian_spectral(*rho, t),
            Self::Laplace { alpha, tau } => (tau / (tau + 0.25 + t * t)).powf(*alpha),
            Self::Custom(spec) => spec.eval(t.abs()).re,
        }
    }

    pub fn radial_law(&self) -> Result<RadialLaw> {
        match self {
            Self::Gaussian { rho } => gaussian_law(*rho),
            Self::Laplace { alpha, tau } => laplace_law(*alpha, *tau),
            Self::Custom(_) => Err(Error::InvalidParameter(
                "a tabulated error transform cannot be sampled".into(),
            )),
        }
    }

    pub fn sample_sl2(&self, n: usize, seed: u64) -> Result<Vec<SL2>> {
        self.radial_law()?.sample_sl2(n, seed)
    }
}

impl fmt::Display for ErrorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Gaussian { rho } => write!(f, "gaussian:{rho}"),
            Self::Laplace { alpha, tau } => write!(f, "laplace:{alpha},{tau}"),
            Self::Custom(spec) => write!(f, "custom:{}", spec.len()),
        }
    }
}

/// Parses `gaussian:RHO` or `laplace:ALPHA,TAU`.
impl FromStr for ErrorModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse error model '{s}'"));
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        let nums: Vec<f64> = args
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        match (kind.trim(), nums.as_slice()) {
            ("gaussian", [rho]) => Self::gaussian(*rho),
            ("laplace", [alpha, tau]) => Self::laplace(*alpha, *tau),
            _ => Err(bad()),
        }
    }
}
