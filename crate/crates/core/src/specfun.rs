//! Conical functions P_{−1/2+it}(cosh r) and the complete elliptic integral K.
//!
//! The conical function is evaluated from the periodic representation
//!
//! ```text
//! P_{−1/2+it}(cosh r) = (1/2π) ∫₀^{2π} (cosh r + sinh r cos φ)^{−1/2+it} dφ
//! ```
//!
//! with the uniform (trapezoidal) rule, which converges geometrically for
//! periodic analytic integrands. The base has a near-zero at φ = π of width
//! ~e^{−r}; the substitution tan(φ/2) = e^{r/2} tan(θ/2) keeps the integrand
//! periodic while widening that strip to ~2e^{−r/2}, so the node count grows
//! like e^{r/2} instead of e^{r}. For r beyond [`TRAPEZOID_MAX_R`] the
//! adaptive method switches to the Mehler–Dirichlet form
//!
//! ```text
//! P_{−1/2+it}(cosh r) = (√2/π) ∫₀^r cos(tu) / √(cosh r − cosh u) du
//! ```
//!
//! with u = r − v² removing the endpoint singularity.
//!
//! For a fixed r both routes reduce to a cosine sum Σ w_k cos(t x_k), which
//! [`ConicalRow`] caches so that many t values share one set of nodes.

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

/// Largest r evaluated with the periodic trapezoidal rule in adaptive mode.
pub const TRAPEZOID_MAX_R: f64 = 10.0;
/// Largest accepted difference between the N- and N/2-node sums. The mapped
/// integrand satisfies b(π − θ) = 1/b(θ), so the imaginary part of the sum
/// vanishes identically and cannot serve as the accuracy check.
pub const HALVING_TOL: f64 = 1e-8;
const CONVERGENCE_TOL: f64 = 1e-10;
const MAX_NODES: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConicalMethod {
    /// Exactly `quadrature_nodes` uniform nodes, no refinement.
    FixedTrapezoidPeriodic,
    /// Doubling from the initial node count until successive sums agree.
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConicalEvalConfig {
    pub quadrature_nodes: usize,
    pub method: ConicalMethod,
}

impl ConicalEvalConfig {
    pub fn new(quadrature_nodes: usize, method: ConicalMethod) -> Result<Self> {
        if quadrature_nodes < 16 {
            return Err(Error::InvalidParameter(format!(
                "conical quadrature needs at least 16 nodes, got {quadrature_nodes}"
            )));
        }
        Ok(Self { quadrature_nodes, method })
    }
}

impl Default for ConicalEvalConfig {
    fn default() -> Self {
        Self { quadrature_nodes: 256, method: ConicalMethod::Adaptive }
    }
}

/// P_{−1/2+it}(cosh r) for a fixed r as the cosine sum Σ w_k cos(t x_k).
#[derive(Debug, Clone)]
pub struct ConicalRow {
    r: f64,
    weights: Vec<f64>,
    phases: Vec<f64>,
    /// |S_N − S_{N/2}| at the probe values of t (zero for the Mehler route).
    pub error_estimate: f64,
}

impl ConicalRow {
    /// Prepares nodes good for every |t| ≤ t_max.
    pub fn new(r: f64, t_max: f64, cfg: &ConicalEvalConfig) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("conical function needs r ≥ 0, got {r}")));
        }
        let t_max = t_max.abs();
        if r == 0.0 {
            return Ok(Self { r, weights: vec![1.0], phases: vec![0.0], error_estimate: 0.0 });
        }
        match cfg.method {
            ConicalMethod::FixedTrapezoidPeriodic => {
                let n = cfg.quadrature_nodes.div_ceil(4) * 4;
                let row = trapezoid_row(r, n, t_max);
                if row.error_estimate > HALVING_TOL {
                    return Err(Error::Convergence(format!(
                        "{n}-node conical quadrature at r = {r}, t = {t_max} is off by ~{:e}",
                        row.error_estimate
                    )));
                }
                Ok(row)
            }
            ConicalMethod::Adaptive if r > TRAPEZOID_MAX_R => Ok(mehler_row(r, t_max)),
            ConicalMethod::Adaptive => {
                let base = cfg.quadrature_nodes.max(8 * (t_max * r).ceil() as usize);
                let mut n = base.next_power_of_two();
                loop {
                    let row = trapezoid_row(r, n, t_max);
                    let change = row.error_estimate;
                    if change < CONVERGENCE_TOL {
                        return Ok(row);
                    }
                    if n >= MAX_NODES {
                        return Err(Error::Convergence(format!(
                            "conical function at r = {r}, t = {t_max}: change {change:e} with {n} nodes"
                        )));
                    }
                    n *= 2;
                }
            }
        }
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.phases)
            .map(|(w, x)| w * (t * x).cos())
            .sum()
    }

    /// The trapezoidal rule on every other node (valid for trapezoid rows).
    fn coarsened(&self) -> Self {
        // node 0 and node N/2 carry multiplicity one, interior nodes two; on
        // the coarse grid the same holds with doubled weights
        let m = self.weights.len() - 1; // = N/2
        let mut weights = Vec::with_capacity(m / 2 + 1);
        let mut phases = Vec::with_capacity(m / 2 + 1);
        for k in (0..=m).step_by(2) {
            weights.push(2.0 * self.weights[k]);
            phases.push(self.phases[k]);
        }
        Self { r: self.r, weights, phases, error_estimate: 0.0 }
    }
}

/// Trapezoidal rule with N (even) nodes on the mapped periodic integrand,
/// folded by the θ ↦ 2π − θ symmetry to N/2 + 1 terms.
fn trapezoid_row(r: f64, n: usize, t_max: f64) -> ConicalRow {
    let half = n / 2;
    let big = r.exp();
    let sqrt_big = (0.5 * r).exp();
    let mut weights = Vec::with_capacity(half + 1);
    let mut phases = Vec::with_capacity(half + 1);
    for k in 0..=half {
        let theta = 2.0 * PI * k as f64 / n as f64;
        let (s, c) = (0.5 * theta).sin_cos();
        let (s2, c2) = (s * s, c * c);
        let num = big * c2 + s2;
        let den = c2 + big * s2;
        // b^{-1/2} J with b = num/den, J = e^{r/2}/den
        let amp = sqrt_big / (num * den).sqrt();
        let mult = if k == 0 || k == half { 1.0 } else { 2.0 };
        weights.push(mult * amp / n as f64);
        phases.push(num.ln() - den.ln());
    }
    let mut row = ConicalRow { r, weights, phases, error_estimate: 0.0 };
    let coarse = row.coarsened();
    row.error_estimate = [0.0, 0.5 * t_max, t_max]
        .iter()
        .map(|&t| (row.eval(t) - coarse.eval(t)).abs())
        .fold(0.0, f64::max);
    row
}

fn mehler_row(r: f64, t_max: f64) -> ConicalRow {
    let v_max = r.sqrt();
    let panels = ((t_max * r / 2.0).ceil() as usize).max(4);
    let rule = GaussLegendre::new(20);
    let mut weights = Vec::with_capacity(panels * 20);
    let mut phases = Vec::with_capacity(panels * 20);
    let width = v_max / panels as f64;
    for p in 0..panels {
        let (vs, ws) = rule.on_interval(p as f64 * width, (p + 1) as f64 * width);
        for (v, w) in vs.into_iter().zip(ws) {
            let v2 = v * v;
            let denom = (2.0 * (r - 0.5 * v2).sinh() * (0.5 * v2).sinh()).sqrt();
            weights.push(SQRT_2 / PI * w * 2.0 * v / denom);
            phases.push(r - v2);
        }
    }
    ConicalRow { r, weights, phases, error_estimate: 0.0 }
}

/// P_{−1/2+it}(cosh r).
pub fn conical_p(t: f64, r: f64, cfg: &ConicalEvalConfig) -> Result<f64> {
    Ok(ConicalRow::new(r, t, cfg)?.eval(t))
}

/// The Mehler–Dirichlet integral evaluated independently of [`ConicalRow`]
/// by adaptive Gauss–Kronrod on the desingularized integrand.
pub fn conical_p_mehler(t: f64, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("conical function needs r ≥ 0, got {r}")));
    }
    if r == 0.0 {
        return Ok(1.0);
    }
    let f = |v: f64| {
        if v == 0.0 {
            return 2.0 * (t * r).cos() / r.sinh().sqrt();
        }
        let v2 = v * v;
        2.0 * v * (t * (r - v2)).cos() / (2.0 * (r - 0.5 * v2).sinh() * (0.5 * v2).sinh()).sqrt()
    };
    let pieces = ((t.abs() * r).ceil() as usize).max(1);
    let v_max = r.sqrt();
    let mut total = 0.0;
    for p in 0..pieces {
        let a = v_max * p as f64 / pieces as f64;
        let b = v_max * (p + 1) as f64 / pieces as f64;
        total += crate::quad::adaptive(f, a, b, 1e-15, 1e-13)?;
    }
    Ok(SQRT_2 / PI * total)
}

/// Complete elliptic integral of the first kind, modulus convention:
/// K(k) = ∫₀^{π/2} dφ / √(1 − k² sin²φ), by the arithmetic–geometric mean.
pub fn elliptic_k(k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k.abs()) {
        return Err(Error::Domain(format!("elliptic K needs |k| < 1, got {k}")));
    }
    let mut a = 1.0;
    let mut b = (1.0 - k * k).sqrt();
    for _ in 0..60 {
        if (a - b).abs() <= 1e-15 * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    Ok(FRAC_PI_2 / a)
}

/// P_{−1/2}(cosh r) = (2 / (π cosh(r/2))) K(tanh(r/2)).
pub fn conical_p_zero_via_elliptic(r: f64) -> Result<f64> {
    Ok(2.0 / (PI * (0.5 * r).cosh()) * elliptic_k((0.5 * r).tanh())?)
}
