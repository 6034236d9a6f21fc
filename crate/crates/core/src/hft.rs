//! Helgason–Fourier transform of SO(2)-invariant functions on ℍ.
//!
//! ```text
//! Hf(1/2 + it) = 2π ∫₀^∞ f(e^{−r} i) P_{−1/2+it}(cosh r) sinh r dr
//! f(e^{−r} i)  = (1/4π) ∫ Hf(1/2 + it) P_{−1/2+it}(cosh r) t tanh(πt) dt
//! ```
//!
//! Spectral functions live on grids symmetric about t = 0 with quadrature
//! weights attached, so every spectral integral is a weighted sum over the
//! grid. Radial densities are tabulated on r-grids starting at 0 and
//! interpolated by monotone cubics; they vanish beyond the last node.

use crate::error::{Error, Result};
use crate::geometry::{geodesic_radius, mobius_apply, HPoint, SL2};
use crate::interp::Pchip;
use crate::par;
use crate::quad::NodeSet;
use crate::specfun::{ConicalEvalConfig, ConicalRow};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::io::{Read, Write};

/// The spectral weight t·tanh(πt).
pub fn spectral_weight(t: f64) -> f64 {
    t * (PI * t).tanh()
}

/// A symmetric t-grid with quadrature weights for integrals over ℝ.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    t: Vec<f64>,
    weights: Vec<f64>,
}

impl SpectralGrid {
    /// Gauss–Legendre panels of width ≤ `panel_width` on [0, t_max], mirrored.
    pub fn gauss(t_max: f64, panel_width: f64, order: usize) -> Result<Self> {
        if !(t_max > 0.0) || !t_max.is_finite() || !(panel_width > 0.0) {
            return Err(Error::Grid(format!(
                "spectral grid needs t_max > 0 and a positive panel width (got {t_max}, {panel_width})"
            )));
        }
        let half = NodeSet::uniform_panels(0.0, t_max, panel_width, order);
        let mut t: Vec<f64> = half.nodes.iter().rev().map(|x| -x).collect();
        t.extend(&half.nodes);
        let mut weights: Vec<f64> = half.weights.iter().rev().copied().collect();
        weights.extend(&half.weights);
        Ok(Self { t, weights })
    }

    /// Panels of width 1/2 with 12 nodes each; enough for the smooth spectral
    /// profiles and for P_{−1/2+it}(cosh r) with r up to ~15.
    pub fn standard(t_max: f64) -> Result<Self> {
        Self::gauss(t_max, 0.5, 12)
    }

    /// Trapezoid weights on an arbitrary ascending grid symmetric about 0.
    pub fn from_nodes(t: Vec<f64>) -> Result<Self> {
        check_symmetric(&t)?;
        let n = t.len();
        let weights = (0..n)
            .map(|k| {
                let lo = if k == 0 { t[0] } else { t[k - 1] };
                let hi = if k + 1 == n { t[n - 1] } else { t[k + 1] };
                0.5 * (hi - lo)
            })
            .collect();
        Ok(Self { t, weights })
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        self.t.last().copied().unwrap_or(0.0)
    }

    /// Index of the first node with t ≥ 0; nodes from here on determine the
    /// rest by symmetry.
    fn half_start(&self) -> usize {
        self.t.len() / 2
    }

    /// (1/4π) Σ w_k g(t_k) t_k tanh(π t_k).
    pub fn spectral_integral<F: Fn(usize, f64) -> f64>(&self, g: F) -> f64 {
        let s: f64 = self
            .t
            .iter()
            .zip(&self.weights)
            .enumerate()
            .map(|(k, (&t, &w))| w * g(k, t) * spectral_weight(t))
            .sum();
        s / (4.0 * PI)
    }
}

fn check_symmetric(t: &[f64]) -> Result<()> {
    if t.is_empty() {
        return Err(Error::Grid("empty spectral grid".into()));
    }
    if !t.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::Grid("spectral grid must be strictly increasing".into()));
    }
    let n = t.len();
    for k in 0..n / 2 + 1 {
        let (a, b) = (t[k], t[n - 1 - k]);
        if (a + b).abs() > 1e-9 * (1.0 + b.abs()) {
            return Err(Error::Grid(format!("spectral grid is not symmetric about 0 ({a} vs {b})")));
        }
    }
    Ok(())
}

/// Tabulated values t ↦ Hf(1/2 + it).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFunction {
    grid: SpectralGrid,
    values: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct SpectralRecord {
    t: f64,
    re: f64,
    im: f64,
}

impl SpectralFunction {
    pub fn new(grid: SpectralGrid, values: Vec<Complex64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::Grid(format!(
                "{} spectral values for {} grid nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: SpectralGrid, f: F) -> Self {
        let values = grid.t.iter().map(|&t| f(t)).collect();
        Self { grid, values }
    }

    pub fn from_real_fn<F: Fn(f64) -> f64>(grid: SpectralGrid, f: F) -> Self {
        Self::from_fn(grid, |t| Complex64::new(f(t), 0.0))
    }

    pub fn grid(&self) -> &SpectralGrid {
        &self.grid
    }

    pub fn t(&self) -> &[f64] {
        &self.grid.t
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// max_k |F(−t_k) − conj F(t_k)|, relative to max(1, max |F|).
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let n = self.values.len();
        let scale = self.values.iter().map(|v| v.norm()).fold(1.0, f64::max);
        (0..n)
            .map(|k| (self.values[n - 1 - k] - self.values[k].conj()).norm())
            .fold(0.0, f64::max)
            / scale
    }

    /// Linear interpolation in t; zero outside the grid.
    pub fn eval(&self, t: f64) -> Complex64 {
        let ts = &self.grid.t;
        let n = ts.len();
        if n == 1 {
            return if t == ts[0] { self.values[0] } else { Complex64::new(0.0, 0.0) };
        }
        if t < ts[0] || t > ts[n - 1] {
            return Complex64::new(0.0, 0.0);
        }
        let k = ts.partition_point(|&v| v <= t).clamp(1, n - 1) - 1;
        let s = (t - ts[k]) / (ts[k + 1] - ts[k]);
        self.values[k] * (1.0 - s) + self.values[k + 1] * s
    }

    pub fn to_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for (&t, v) in self.grid.t.iter().zip(&self.values) {
            out.serialize(SpectralRecord { t, re: v.re, im: v.im })?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads `t,re,im` rows; the weights become trapezoid weights.
    pub fn from_csv<R: Read>(r: R) -> Result<Self> {
        let mut t = Vec::new();
        let mut values = Vec::new();
        for rec in csv::Reader::from_reader(r).deserialize() {
            let rec: SpectralRecord = rec?;
            t.push(rec.t);
            values.push(Complex64::new(rec.re, rec.im));
        }
        Self::new(SpectralGrid::from_nodes(t)?, values)
    }
}

/// Uniform r-grid 0 = r_0 < … < r_n = r_max.
pub fn radial_grid(r_max: f64, intervals: usize) -> Vec<f64> {
    (0..=intervals)
        .map(|k| r_max * k as f64 / intervals as f64)
        .collect()
}

/// Tabulated r ↦ f(e^{−r} i).
#[derive(Debug, Clone)]
pub struct RadialDensity {
    interp: Pchip,
}

#[derive(Serialize, Deserialize)]
struct RadialRecord {
    r: f64,
    value: f64,
}

impl RadialDensity {
    pub fn new(r: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if r.first().copied() != Some(0.0) {
            return Err(Error::Grid("radial grid must start at r = 0".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Grid(format!("non-finite radial value {v}")));
        }
        Ok(Self { interp: Pchip::new(r, values)? })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(r: Vec<f64>, f: F) -> Result<Self> {
        let values = r.iter().map(|&x| f(x)).collect();
        Self::new(r, values)
    }

    pub fn r(&self) -> &[f64] {
        self.interp.x()
    }

    pub fn values(&self) -> &[f64] {
        self.interp.y()
    }

    pub fn r_max(&self) -> f64 {
        *self.interp.x().last().expect("nonempty grid")
    }

    /// f(e^{−r} i); zero beyond the grid.
    pub fn eval(&self, r: f64) -> f64 {
        if r > self.r_max() {
            0.0
        } else {
            self.interp.eval(r)
        }
    }

    /// The measure-weighted profile f̃(r) = 2π sinh(r) f(e^{−r} i).
    pub fn tilde(&self, r: f64) -> f64 {
        TAU * r.sinh() * self.eval(r)
    }

    /// Gauss–Legendre nodes with `order` points on every grid interval.
    pub fn nodes(&self, order: usize) -> NodeSet {
        NodeSet::panels(self.r(), order)
    }

    /// ∫ f dμ = ∫₀^∞ 2π sinh r f(e^{−r} i) dr.
    pub fn mass(&self) -> f64 {
        self.nodes(4).integrate(|r| self.tilde(r))
    }

    /// New density with values from `f` on the same grid.
    pub fn map<F: Fn(f64, f64) -> f64>(&self, f: F) -> Result<Self> {
        let values = self.r().iter().zip(self.values()).map(|(&r, &v)| f(r, v)).collect();
        Self::new(self.r().to_vec(), values)
    }

    pub fn to_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for (&r, &value) in self.r().iter().zip(self.values()) {
            out.serialize(RadialRecord { r, value })?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn from_csv<R: Read>(r: R) -> Result<Self> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for rec in csv::Reader::from_reader(r).deserialize() {
            let rec: RadialRecord = rec?;
            xs.push(rec.r);
            ys.push(rec.value);
        }
        Self::new(xs, ys)
    }
}

/// A nonempty sample of points of ℍ.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    points: Vec<HPoint>,
}

#[derive(Serialize, Deserialize)]
struct PointRecord {
    re: f64,
    im: f64,
}

impl Sample {
    pub fn new(points: Vec<HPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidParameter("a sample needs at least one point".into()));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[HPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for p in &self.points {
            out.serialize(PointRecord { re: p.re(), im: p.im() })?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn from_csv<R: Read>(r: R) -> Result<Self> {
        let mut points = Vec::new();
        for rec in csv::Reader::from_reader(r).deserialize() {
            let rec: PointRecord = rec?;
            points.push(HPoint::new(rec.re, rec.im)?);
        }
        Self::new(points)
    }
}

/// P_{−1/2+it}(cosh r) on a product grid, row-major in r.
#[derive(Debug, Clone)]
pub struct ConicalTable {
    t: Vec<f64>,
    values: Vec<f64>,
}

impl ConicalTable {
    pub fn new(r: &[f64], t: &[f64], cfg: &ConicalEvalConfig) -> Result<Self> {
        let t: Vec<f64> = t.iter().map(|x| x.abs()).collect();
        let t_max = t.iter().copied().fold(0.0, f64::max);
        let rows = par::map(r, |&ri| -> Result<Vec<f64>> {
            let row = ConicalRow::new(ri, t_max, cfg)?;
            Ok(t.iter().map(|&tk| row.eval(tk)).collect())
        });
        let mut values = Vec::with_capacity(r.len() * t.len());
        for row in rows {
            values.extend(row?);
        }
        Ok(Self { t, values })
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.t.len();
        &self.values[i * m..(i + 1) * m]
    }
}

/// Forward transform of a radial function given as a closure, integrated on
/// the supplied r-nodes.
pub fn forward_radial_fn<F: Fn(f64) -> f64>(f: F, r_nodes: &NodeSet, grid: &SpectralGrid) -> Result<SpectralFunction> {
    let start = grid.half_start();
    let half_t = &grid.t[start..];
    let table = ConicalTable::new(&r_nodes.nodes, half_t, &ConicalEvalConfig::default())?;
    let mut half = vec![0.0; half_t.len()];
    for (i, (&r, &w)) in r_nodes.nodes.iter().zip(&r_nodes.weights).enumerate() {
        let c = w * TAU * r.sinh() * f(r);
        if c == 0.0 {
            continue;
        }
        for (acc, p) in half.iter_mut().zip(table.row(i)) {
            *acc += c * p;
        }
    }
    let n = grid.len();
    let mut values = vec![Complex64::new(0.0, 0.0); n];
    for (j, v) in half.into_iter().enumerate() {
        values[start + j] = Complex64::new(v, 0.0);
        values[n - 1 - (start + j)] = Complex64::new(v, 0.0);
    }
    SpectralFunction::new(grid.clone(), values)
}

/// Hf(1/2 + it) on `grid` for a tabulated radial density.
pub fn forward_radial(f: &RadialDensity, grid: &SpectralGrid) -> Result<SpectralFunction> {
    let r = f.r();
    let n = r.len();
    if n >= 2 {
        let mass = f.nodes(4).integrate(|x| f.tilde(x).abs());
        let tail = f.tilde(r[n - 1]).abs() * (r[n - 1] - r[n - 2]);
        if tail > 1e-8 * mass.max(f64::MIN_POSITIVE) {
            log::warn!(
                "forward transform: integrand at r_max = {} still carries {:.2e} of the mass",
                r[n - 1],
                tail / mass
            );
        }
    }
    forward_radial_fn(|x| f.eval(x), &f.nodes(6), grid)
}

/// f(e^{−r} i) on `r_grid` from tabulated transform values.
pub fn inverse_radial(spec: &SpectralFunction, r_grid: &[f64]) -> Result<RadialDensity> {
    let defect = spec.conjugate_symmetry_defect();
    if defect > 1e-8 {
        return Err(Error::Grid(format!(
            "spectral values are not conjugate symmetric (defect {defect:e})"
        )));
    }
    let values = inverse_values(spec, r_grid)?;
    RadialDensity::new(r_grid.to_vec(), values)
}

/// The inverse transform at arbitrary r (no grid requirements on r).
pub fn inverse_values(spec: &SpectralFunction, r: &[f64]) -> Result<Vec<f64>> {
    let grid = spec.grid();
    let start = grid.half_start();
    let n = grid.len();
    let table = ConicalTable::new(r, &grid.t[start..], &ConicalEvalConfig::default())?;
    let mut out = Vec::with_capacity(r.len());
    for i in 0..r.len() {
        let row = table.row(i);
        let mut re = 0.0;
        let mut im = 0.0;
        let mut scale = 0.0;
        for k in 0..n {
            let j = if k >= start { k - start } else { n - 1 - k - start };
            let c = grid.weights[k] * row[j] * spectral_weight(grid.t[k]);
            re += c * spec.values[k].re;
            im += c * spec.values[k].im;
            scale += (c * spec.values[k].norm()).abs();
        }
        if im.abs() > 1e-6 * scale.max(1.0) {
            return Err(Error::Grid(format!(
                "inverse transform at r = {} has imaginary residual {:e}",
                r[i],
                im / (4.0 * PI)
            )));
        }
        out.push(re / (4.0 * PI));
    }
    Ok(out)
}

/// ‖f‖ from the transform: (∫ |Hf|² dτ)^{1/2} with dτ = (1/8π²) t tanh(πt) dt du.
pub fn plancherel_norm(spec: &SpectralFunction) -> f64 {
    spec.grid()
        .spectral_integral(|k, _| spec.values[k].norm_sqr())
        .max(0.0)
        .sqrt()
}

/// ‖f‖ = (∫₀^∞ 2π sinh r f(e^{−r} i)² dr)^{1/2}.
pub fn l2_norm_radial(f: &RadialDensity) -> f64 {
    f.nodes(6)
        .integrate(|r| TAU * r.sinh() * f.eval(r).powi(2))
        .sqrt()
}

/// The sample moments (1/n) Σ y_j^{1/2 − it} of a list of heights y_j > 0.
#[derive(Debug, Clone)]
pub struct EmpiricalSpectrum {
    log_y: Vec<f64>,
    sqrt_y: Vec<f64>,
}

impl EmpiricalSpectrum {
    pub fn from_heights(ys: &[f64]) -> Self {
        Self {
            log_y: ys.iter().map(|y| y.ln()).collect(),
            sqrt_y: ys.iter().map(|y| y.sqrt()).collect(),
        }
    }

    /// Heights Im(Y_j).
    pub fn invariant(sample: &Sample) -> Self {
        let ys: Vec<f64> = sample.points().iter().map(|p| p.im()).collect();
        Self::from_heights(&ys)
    }

    /// Heights Im(k_u(Y_j)).
    pub fn at_angle(sample: &Sample, k_angle: f64) -> Self {
        let k = SL2::rotation(k_angle);
        let ys: Vec<f64> = sample.points().iter().map(|p| mobius_apply(&k, *p).im()).collect();
        Self::from_heights(&ys)
    }

    pub fn len(&self) -> usize {
        self.log_y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_y.is_empty()
    }

    /// Σ_j y_j (the diagonal of |Σ_j y_j^{1/2−it}|²).
    pub fn sum_heights(&self) -> f64 {
        self.sqrt_y.iter().map(|s| s * s).sum()
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let (re, im) = par::chunked_sum(self.len(), |j| {
            let (s, c) = (-t * self.log_y[j]).sin_cos();
            (self.sqrt_y[j] * c, self.sqrt_y[j] * s)
        });
        Complex64::new(re, im) / self.len() as f64
    }
}

/// (1/n) Σ Im(k(Y_j))^{1/2 − it} with k the rotation by `k_angle`.
pub fn empirical_transform(sample: &Sample, t: f64, k_angle: f64) -> Complex64 {
    EmpiricalSpectrum::at_angle(sample, k_angle).eval(t)
}

/// (1/n) Σ Im(Y_j)^{1/2 − it}.
pub fn empirical_transform_invariant(sample: &Sample, t: f64) -> Complex64 {
    EmpiricalSpectrum::invariant(sample).eval(t)
}

/// Prefactor of the polar convolution integral over φ ∈ [0, 2π):
///
/// ```text
/// (f*h)(e^{−r} i) = C ∫₀^{2π} ∫₀^∞ f(e^{−s} i) h(R(r, s, φ)) sinh s ds dφ
/// ```
///
/// with R from [`geodesic_radius`]. Calibrated against the heat semigroup
/// g_{ρ1} * g_{ρ2} = g_{ρ1+ρ2}; the value agrees with the area element
/// sinh s ds dθ once θ = 2φ is accounted for.
pub const CONVOLUTION_CONSTANT: f64 = 1.0;

/// Direct polar-coordinate convolution of an invariant error density with an
/// invariant density h, evaluated on `r_grid`.
pub fn convolve_radial_oracle(f_err: &RadialDensity, h: &RadialDensity, r_grid: &[f64]) -> Result<RadialDensity> {
    convolve_with_constant(f_err, h, r_grid, CONVOLUTION_CONSTANT)
}

pub(crate) fn convolve_with_constant(
    f_err: &RadialDensity,
    h: &RadialDensity,
    r_grid: &[f64],
    constant: f64,
) -> Result<RadialDensity> {
    let s_nodes = f_err.nodes(8);
    let s_weights: Vec<f64> = s_nodes
        .nodes
        .iter()
        .zip(&s_nodes.weights)
        .map(|(&s, &w)| w * s.sinh() * f_err.eval(s))
        .collect();
    // cos 2φ is even about φ = π/2 and π-periodic: [0, 2π) is four copies of [0, π/2]
    let phi = NodeSet::panels(&[0.0, FRAC_PI_2 / 3.0, FRAC_PI_2 * 2.0 / 3.0, FRAC_PI_2], 16);
    let rule_norm = 4.0 * constant;
    let values = par::map(r_grid, |&r| {
        let mut acc = 0.0;
        for (&s, &ws) in s_nodes.nodes.iter().zip(&s_weights) {
            if ws == 0.0 {
                continue;
            }
            let inner: f64 = phi
                .nodes
                .iter()
                .zip(&phi.weights)
                .map(|(&p, &wp)| wp * h.eval(geodesic_radius(r, s, p)))
                .sum();
            acc += ws * inner;
        }
        rule_norm * acc
    });
    let out = RadialDensity::new(r_grid.to_vec(), values)?;
    let expected = f_err.mass() * h.mass();
    let got = out.mass();
    if expected > 0.0 && (expected - got) > 1e-3 * expected {
        log::warn!("convolution oracle lost {:.2e} of the mass on the output grid", 1.0 - got / expected);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn grids_are_symmetric() {
        let g = SpectralGrid::standard(3.0).unwrap();
        let n = g.len();
        for k in 0..n {
            assert_eq!(g.t()[k], -g.t()[n - 1 - k]);
        }
        let total: f64 = g.weights().iter().sum();
        assert_abs_diff_eq!(total, 6.0, epsilon = 1e-12);
        assert!(SpectralGrid::from_nodes(vec![-1.0, 0.0, 2.0]).is_err());
        let single = SpectralGrid::from_nodes(vec![0.0]).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn single_node_grid_gives_real_value() {
        let f = RadialDensity::from_fn(radial_grid(8.0, 400), |r| r.cosh().powi(-3)).unwrap();
        let spec = forward_radial(&f, &SpectralGrid::from_nodes(vec![0.0]).unwrap()).unwrap();
        assert_eq!(spec.len(), 1);
        assert_eq!(spec.values()[0].im, 0.0);
        assert!(spec.values()[0].re > 0.0);
    }

    #[test]
    fn empirical_examples() {
        let s = Sample::new(vec![HPoint::I]).unwrap();
        assert_eq!(empirical_transform(&s, 2.3, 0.0), Complex64::new(1.0, 0.0));
        let r: f64 = 0.8;
        let s = Sample::new(vec![HPoint::on_axis(r)]).unwrap();
        let v = empirical_transform_invariant(&s, 1.7);
        let expect = Complex64::from_polar((-0.5 * r).exp(), r * 1.7);
        assert_abs_diff_eq!(v.re, expect.re, epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, expect.im, epsilon = 1e-15);
        let two = HPoint::new(0.0, 2.0).unwrap();
        let s = Sample::new(vec![two, two]).unwrap();
        let v = empirical_transform_invariant(&s, 0.9);
        let expect = Complex64::new(2.0, 0.0).powc(Complex64::new(0.5, -0.9));
        assert!((v - expect).norm() < 1e-14);
    }

    #[test]
    fn invariant_transform_is_the_identity_angle_case() {
        let pts: Vec<HPoint> = (1..50)
            .map(|k| HPoint::new((k as f64 * 0.37).sin(), 0.2 + (k as f64 * 0.11).cos().abs()).unwrap())
            .collect();
        let s = Sample::new(pts).unwrap();
        for t in [0.0, 0.4, 3.3] {
            assert_eq!(empirical_transform(&s, t, 0.0), empirical_transform_invariant(&s, t));
        }
    }

    #[test]
    fn empirical_modulus_bound() {
        let pts: Vec<HPoint> = (1..30).map(|k| HPoint::new(k as f64 * 0.1, 0.5 + k as f64 * 0.03).unwrap()).collect();
        let s = Sample::new(pts).unwrap();
        for (t, u) in [(0.3, 0.2), (4.0, 1.1)] {
            let k = SL2::rotation(u);
            let bound: f64 =
                s.points().iter().map(|&p| mobius_apply(&k, p).im().sqrt()).sum::<f64>() / s.len() as f64;
            assert!(empirical_transform(&s, t, u).norm() <= bound + 1e-14);
        }
    }

    #[test]
    fn zero_transform_has_zero_norm() {
        let g = SpectralGrid::standard(2.0).unwrap();
        let f = SpectralFunction::from_real_fn(g, |_| 0.0);
        assert_eq!(plancherel_norm(&f), 0.0);
    }

    #[test]
    fn csv_round_trips() {
        let g = SpectralGrid::from_nodes(vec![-1.0, -0.5, 0.0, 0.5, 1.0]).unwrap();
        let f = SpectralFunction::from_fn(g, |t| Complex64::new(t * t, t));
        let mut buf = Vec::new();
        f.to_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("t,re,im"));
        let back = SpectralFunction::from_csv(buf.as_slice()).unwrap();
        assert_eq!(back, f);

        let d = RadialDensity::from_fn(radial_grid(2.0, 4), |r| (-r).exp()).unwrap();
        let mut buf = Vec::new();
        d.to_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("r,value"));
        let back = RadialDensity::from_csv(buf.as_slice()).unwrap();
        assert_eq!(back.values(), d.values());

        let s = Sample::new(vec![HPoint::I, HPoint::new(0.5, 0.25).unwrap()]).unwrap();
        let mut buf = Vec::new();
        s.to_csv(&mut buf).unwrap();
        assert_eq!(Sample::from_csv(buf.as_slice()).unwrap(), s);
        assert!(Sample::from_csv("re,im\n0.0,-1.0\n".as_bytes()).is_err());
    }

    #[test]
    fn asymmetric_spectrum_is_rejected_by_the_inverse() {
        let g = SpectralGrid::standard(2.0).unwrap();
        let f = SpectralFunction::from_real_fn(g, |t| (-(t - 0.3).powi(2)).exp());
        assert!(matches!(inverse_radial(&f, &[0.0, 1.0]), Err(Error::Grid(_))));
    }
}
