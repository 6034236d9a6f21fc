//! Impedances as points of the half planes and the resistor-through-capacitor
//! workflow.
//!
//! A normalized impedance Z̃ = Z/Z_c with Re Z̃ > 0 corresponds to iZ̃ ∈ ℍ.
//! Lossless two-ports act on iZ̃ through I∘M_cha∘I⁻¹ with I(z) = iz, which is
//! the real matrix [[a, −β], [γ, d]] for cha = [[a, iβ], [iγ, d]].

use crate::deconv::{cv_cutoff, default_t_grid, CvConfig, CvForm, DeconvConfig, PointwiseEstimator};
use crate::distributions::{sample_gaussian_sl2, ErrorModel};
use crate::error::{Error, Result};
use crate::geometry::{from_polar, hyperbolic_distance, mobius_apply, HPoint, HPolar, SL2};
use crate::hft::Sample;
use crate::{par, rng};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{Read, Write};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Impedance(pub Complex64);

impl Impedance {
    pub fn new(re: f64, im: f64) -> Self {
        Self(Complex64::new(re, im))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    /// Purely reactive (on the boundary of the right half plane).
    pub fn is_lossless(self) -> bool {
        self.0.re == 0.0
    }

    pub fn is_physical(self) -> bool {
        self.0.re > 0.0
    }
}

/// The chain matrix [[cha11, cha12], [cha21, cha22]] of a two-port.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainMatrix {
    pub m: [[Complex64; 2]; 2],
}

impl ChainMatrix {
    pub fn new(c11: Complex64, c12: Complex64, c21: Complex64, c22: Complex64) -> Self {
        Self { m: [[c11, c12], [c21, c22]] }
    }

    pub fn identity() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Self::new(o, z, z, o)
    }

    /// Series impedance Z.
    pub fn series(z: Complex64) -> Self {
        let (o, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Self::new(o, z, zero, o)
    }

    /// Shunt admittance Y.
    pub fn shunt(y: Complex64) -> Self {
        let (o, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Self::new(o, zero, y, o)
    }

    pub fn mul(&self, other: &ChainMatrix) -> ChainMatrix {
        let (a, b) = (&self.m, &other.m);
        let e = |i: usize, j: usize| a[i][0] * b[0][j] + a[i][1] * b[1][j];
        Self::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Real diagonal and imaginary off-diagonal entries within `tol`.
    pub fn is_lossless(&self, tol: f64) -> bool {
        self.m[0][0].im.abs() <= tol
            && self.m[1][1].im.abs() <= tol
            && self.m[0][1].re.abs() <= tol
            && self.m[1][0].re.abs() <= tol
    }

    /// I∘M∘I⁻¹ as an element of SL(2,ℝ); requires a lossless matrix of
    /// determinant one.
    pub fn to_sl2(&self) -> Result<SL2> {
        if !self.is_lossless(1e-12) {
            return Err(Error::Domain("chain matrix is not lossless".into()));
        }
        SL2::new(self.m[0][0].re, -self.m[0][1].im, self.m[1][0].im, self.m[1][1].re)
    }
}

/// Γ = (Z_L − Z_c)/(Z_L + Z_c).
pub fn reflection_coefficient(z_l: Complex64, z_c: Complex64) -> Result<Complex64> {
    if z_l.is_infinite() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let den = z_l + z_c;
    if den == Complex64::new(0.0, 0.0) {
        return Err(Error::Domain("Z_L + Z_c = 0".into()));
    }
    if z_l.norm() > z_c.norm() {
        let q = z_c / z_l;
        return Ok((1.0 - q) / (1.0 + q));
    }
    Ok((z_l - z_c) / den)
}

/// M_cha(Z_L) = (cha11 Z_L + cha12)/(cha21 Z_L + cha22).
pub fn chain_apply(cha: &ChainMatrix, z_l: Impedance) -> Result<Impedance> {
    let m = &cha.m;
    let den = m[1][0] * z_l.0 + m[1][1];
    if den.norm() == 0.0 {
        return Err(Error::Domain("chain matrix denominator vanishes".into()));
    }
    Ok(Impedance((m[0][0] * z_l.0 + m[0][1]) / den))
}

/// i·Z/Z_c.
pub fn impedance_to_h(z: Impedance, z_c: Complex64) -> Result<HPoint> {
    if z_c.norm() == 0.0 {
        return Err(Error::Domain("characteristic impedance is zero".into()));
    }
    let w = Complex64::i() * z.0 / z_c;
    if !(w.im > 0.0) || !w.re.is_finite() {
        return Err(Error::Domain(format!("normalized impedance {} has Re ≤ 0", z.0 / z_c)));
    }
    HPoint::from_complex(w)
}

/// Z = −i·z·Z_c.
pub fn h_to_impedance(p: HPoint, z_c: Complex64) -> Impedance {
    Impedance(-Complex64::i() * p.to_complex() * z_c)
}

/// Z1 Z2/(Z1 + Z2).
pub fn parallel(z1: Complex64, z2: Complex64) -> Result<Complex64> {
    if z1.is_infinite() {
        return Ok(z2);
    }
    if z2.is_infinite() {
        return Ok(z1);
    }
    let den = z1 + z2;
    if den.norm() == 0.0 {
        return Err(Error::Domain("Z1 + Z2 = 0".into()));
    }
    Ok(z1 * z2 / den)
}

/// 1/(1/Z1 + 1/Z2).
pub fn parallel_admittance(z1: Complex64, z2: Complex64) -> Result<Complex64> {
    let y = z1.inv() + z2.inv();
    if y.norm() == 0.0 || !y.re.is_finite() {
        return Err(Error::Domain("total admittance vanishes".into()));
    }
    Ok(y.inv())
}

/// 1/(iωC).
pub fn capacitor_impedance(capacitance: f64, freq_hz: f64) -> Complex64 {
    (Complex64::i() * (2.0 * PI * freq_hz * capacitance)).inv()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub freq_hz: f64,
    pub z: Impedance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedRow {
    /// 1-based line number in the file, header included.
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    rows: Vec<Measurement>,
    pub source: String,
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    freq_hz: f64,
    re_ohm: f64,
    im_ohm: f64,
}

impl MeasurementSet {
    pub fn new(rows: Vec<Measurement>, source: impl Into<String>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter("measurement set is empty".into()));
        }
        if let Some(bad) = rows.iter().find(|m| !(m.freq_hz > 0.0)) {
            return Err(Error::InvalidParameter(format!("frequency {} is not positive", bad.freq_hz)));
        }
        Ok(Self { rows, source: source.into() })
    }

    pub fn rows(&self) -> &[Measurement] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn impedances(&self) -> Vec<Complex64> {
        self.rows.iter().map(|m| m.z.0).collect()
    }

    /// Reads `freq_hz,re_ohm,im_ohm`. Unparseable rows, nonpositive
    /// frequencies and Re ≤ 0 are skipped and reported.
    pub fn from_csv<R: Read>(r: R, source: impl Into<String>) -> Result<(Self, Vec<RejectedRow>)> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let headers = reader.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["freq_hz", "re_ohm", "im_ohm"] {
            return Err(Error::InvalidParameter(format!(
                "expected header freq_hz,re_ohm,im_ohm, got {}",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut rows = Vec::new();
        let mut rejected = Vec::new();
        for (k, rec) in reader.records().enumerate() {
            let line = k + 2;
            let parsed = rec.map_err(|e| e.to_string()).and_then(|rec| rec.deserialize::<CsvRow>(Some(&headers)).map_err(|e| e.to_string()));
            match parsed {
                Err(e) => rejected.push(RejectedRow { line, reason: format!("unparseable: {e}") }),
                Ok(row) if !(row.freq_hz > 0.0) => {
                    rejected.push(RejectedRow { line, reason: format!("frequency {} is not positive", row.freq_hz) })
                }
                Ok(row) if !(row.re_ohm > 0.0) || !row.im_ohm.is_finite() => {
                    rejected.push(RejectedRow { line, reason: format!("resistance {} is not positive", row.re_ohm) })
                }
                Ok(row) => rows.push(Measurement { freq_hz: row.freq_hz, z: Impedance::new(row.re_ohm, row.im_ohm) }),
            }
        }
        for r in &rejected {
            log::warn!("rejected line {}: {}", r.line, r.reason);
        }
        Ok((Self::new(rows, source)?, rejected))
    }

    pub fn to_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["freq_hz", "re_ohm", "im_ohm"])?;
        for m in &self.rows {
            out.write_record([m.freq_hz.to_string(), m.z.0.re.to_string(), m.z.0.im.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZcMethod {
    EuclideanMean,
    Fixed(Complex64),
}

pub fn characteristic_impedance(ms: &MeasurementSet, method: ZcMethod) -> Complex64 {
    match method {
        ZcMethod::EuclideanMean => ms.rows.iter().map(|m| m.z.0).sum::<Complex64>() / ms.len() as f64,
        ZcMethod::Fixed(z) => z,
    }
}

/// ρ̂ with E cosh d(ε(i), i) = e^{2ρ} for the Gaussian law, from points
/// already normalized to sit around i.
pub fn estimate_rho_eps(points: &[HPoint]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("no points".into()));
    }
    let m = points.iter().map(|&p| hyperbolic_distance(p, HPoint::I).cosh()).sum::<f64>() / points.len() as f64;
    Ok(0.5 * m.ln())
}

/// ρ̂ from capacitor-only impedances normalized by their Euclidean mean.
pub fn estimate_rho_eps_from_impedances(zs: &[Complex64]) -> Result<f64> {
    if zs.is_empty() {
        return Err(Error::InvalidParameter("no impedances".into()));
    }
    let mean = zs.iter().sum::<Complex64>() / zs.len() as f64;
    let pts = zs.iter().map(|&z| impedance_to_h(Impedance(z), mean)).collect::<Result<Vec<_>>>()?;
    estimate_rho_eps(&pts)
}

/// The simulated resistor-through-capacitor experiment: resistors uniform in
/// [r_lo, r_hi], capacitor impedances Z = −i Z_nom ε(i) with ε Gaussian of
/// parameter ρ_ε and Z_nom = 1/(iωC), observations W = parallel(R, Z).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuldaConfig {
    pub n: usize,
    pub r_lo: f64,
    pub r_hi: f64,
    pub capacitance: f64,
    pub freq_hz: f64,
    pub rho_eps: f64,
    pub seed: u64,
}

impl FuldaConfig {
    pub fn new(n: usize, rho_eps: f64, seed: u64) -> Self {
        Self { n, r_lo: 13.5, r_hi: 17.7, capacitance: 22e-6, freq_hz: 1000.0, rho_eps, seed }
    }
}

#[derive(Debug, Clone)]
pub struct FuldaSimulation {
    pub resistors: Vec<f64>,
    pub capacitors: Vec<Complex64>,
    pub measurements: MeasurementSet,
}

impl FuldaSimulation {
    pub fn mean_capacitor(&self) -> Complex64 {
        self.capacitors.iter().sum::<Complex64>() / self.capacitors.len() as f64
    }
}

pub fn simulate_fulda(cfg: &FuldaConfig) -> Result<FuldaSimulation> {
    if cfg.n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if !(cfg.r_lo > 0.0 && cfg.r_hi >= cfg.r_lo) || !(cfg.capacitance > 0.0) || !(cfg.freq_hz > 0.0) {
        return Err(Error::InvalidParameter("resistor range, capacitance and frequency must be positive".into()));
    }
    let (lo, hi) = (cfg.r_lo, cfg.r_hi);
    let resistors = rng::draws(cfg.n, rng::derive_seed(cfg.seed, 1), |g| lo + (hi - lo) * g.gen::<f64>());
    let eps = sample_gaussian_sl2(cfg.rho_eps, cfg.n, rng::derive_seed(cfg.seed, 2))?;
    let z_nom = capacitor_impedance(cfg.capacitance, cfg.freq_hz);
    let capacitors: Vec<Complex64> = eps
        .iter()
        .map(|e| -Complex64::i() * z_nom * mobius_apply(e, HPoint::I).to_complex())
        .collect();
    let rows = resistors
        .iter()
        .zip(&capacitors)
        .map(|(&r, &c)| Ok(Measurement { freq_hz: cfg.freq_hz, z: Impedance(parallel(Complex64::new(r, 0.0), c)?) }))
        .collect::<Result<Vec<_>>>()?;
    Ok(FuldaSimulation { resistors, capacitors, measurements: MeasurementSet::new(rows, "simulated")? })
}

/// Polar mesh z = k_u(e^{−r} i); u ∈ [0, π) covers ℍ once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarMesh {
    pub angles: Vec<f64>,
    pub radii: Vec<f64>,
}

impl Default for PolarMesh {
    fn default() -> Self {
        Self::geometric(16, 24, 0.01, 1.5).expect("default mesh")
    }
}

impl PolarMesh {
    /// `n_angles` uniform angles and `n_radii` geometric radii in [r_min, r_max].
    pub fn geometric(n_angles: usize, n_radii: usize, r_min: f64, r_max: f64) -> Result<Self> {
        if n_angles == 0 || n_radii < 2 || !(r_min > 0.0 && r_max > r_min) {
            return Err(Error::InvalidParameter(format!(
                "mesh needs ≥1 angle, ≥2 radii and 0 < r_min < r_max (got {n_angles}, {n_radii}, {r_min}, {r_max})"
            )));
        }
        let angles = (0..n_angles).map(|k| PI * k as f64 / n_angles as f64).collect();
        let q = (r_max / r_min).ln() / (n_radii - 1) as f64;
        let radii = (0..n_radii).map(|k| r_min * (q * k as f64).exp()).collect();
        Ok(Self { angles, radii })
    }

    pub fn point(&self, angle: usize, radius: usize) -> HPoint {
        from_polar(HPolar { r: self.radii[radius], u: self.angles[angle] })
    }

    /// Cell areas 2 sinh r Δr Δu with midpoint cell boundaries (the measure
    /// in (r, u) with u ∈ [0, π) is 2 sinh r dr du).
    pub fn cell_weights(&self) -> Vec<f64> {
        let du = PI / self.angles.len() as f64;
        let n = self.radii.len();
        (0..n)
            .map(|k| {
                let a = if k == 0 { 0.0 } else { 0.5 * (self.radii[k - 1] + self.radii[k]) };
                let b = if k + 1 == n { self.radii[k] } else { 0.5 * (self.radii[k] + self.radii[k + 1]) };
                2.0 * (b.cosh() - a.cosh()) * du
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleSlice {
    pub angle: f64,
    /// f̂ at the mesh radii.
    pub estimate: Vec<f64>,
    /// f̂ · sinh r.
    pub density: Vec<f64>,
}

impl AngleSlice {
    /// Writes `r,density`.
    pub fn to_csv<W: Write>(&self, radii: &[f64], w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["r", "density"])?;
        for (r, d) in radii.iter().zip(&self.density) {
            out.write_record([r.to_string(), d.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImpedanceCutoff {
    /// T = 1/(2√ρ_ε): the band on which 1/E stays below e^{1/4}.
    ErrorScale,
    /// Cross-validated over rotations. The resistor image is a curve, so the
    /// target is not square integrable and the criterion tends to run to the
    /// top of the grid.
    Cv,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpedanceOptions {
    pub rho_eps: f64,
    pub zc: ZcMethod,
    pub cutoff: ImpedanceCutoff,
    pub k_nodes: usize,
}

impl ImpedanceOptions {
    pub fn new(rho_eps: f64) -> Self {
        Self { rho_eps, zc: ZcMethod::EuclideanMean, cutoff: ImpedanceCutoff::ErrorScale, k_nodes: 128 }
    }
}

pub fn error_scale_cutoff(rho_eps: f64) -> f64 {
    0.5 / rho_eps.sqrt()
}

#[derive(Debug, Clone)]
pub struct ImpedanceDeconv {
    pub zc: Complex64,
    pub cutoff: f64,
    pub points: Sample,
    pub mesh: PolarMesh,
    pub slices: Vec<AngleSlice>,
}

impl ImpedanceDeconv {
    /// (point, positive-part mass) for every mesh cell.
    pub fn cell_masses(&self) -> Vec<(HPoint, f64)> {
        let w = self.mesh.cell_weights();
        let mut out = Vec::with_capacity(self.mesh.angles.len() * self.mesh.radii.len());
        for (a, slice) in self.slices.iter().enumerate() {
            for (k, &f) in slice.estimate.iter().enumerate() {
                out.push((self.mesh.point(a, k), f.max(0.0) * w[k]));
            }
        }
        out
    }
}

/// Cutoff grid for the impedance workflow: log-spaced from 1 up to the
/// Gaussian schedule value plus a margin scaled to 1/√ρ.
pub fn impedance_t_grid(rho_eps: f64, n: usize) -> Vec<f64> {
    let hi = ((n.max(3) as f64).ln() / (4.0 * rho_eps)).sqrt().min(2.0 / rho_eps.sqrt());
    let (lo, hi) = (1.0f64, hi.max(4.0));
    (0..40).map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / 39.0).exp()).collect()
}

/// Normalizes by Z_c, then evaluates the k-dependent estimator with Gaussian
/// errors of parameter ρ_ε on every mesh point.
pub fn deconvolve_impedances(ms: &MeasurementSet, opts: &ImpedanceOptions, mesh: &PolarMesh) -> Result<ImpedanceDeconv> {
    if !(opts.rho_eps > 0.0) {
        return Err(Error::InvalidParameter(format!("rho_eps must be positive, got {}", opts.rho_eps)));
    }
    let zc = characteristic_impedance(ms, opts.zc);
    let points = ms.rows.iter().map(|m| impedance_to_h(m.z, zc)).collect::<Result<Vec<_>>>()?;
    let sample = Sample::new(points)?;
    let error = ErrorModel::gaussian(opts.rho_eps)?;
    let cutoff = match opts.cutoff {
        ImpedanceCutoff::Fixed(t) => t,
        ImpedanceCutoff::ErrorScale => error_scale_cutoff(opts.rho_eps),
        ImpedanceCutoff::Cv => {
            let grid = if sample.len() >= 2 { impedance_t_grid(opts.rho_eps, sample.len()) } else { default_t_grid(1.0) };
            let cfg = CvConfig { form: CvForm::General { k_nodes: 16 }, ..CvConfig::default() };
            cv_cutoff(&sample, &error, &grid, &cfg)?.selected
        }
    };
    let cfg = DeconvConfig::new(cutoff, error, vec![0.0, 1.0])?;
    let est = PointwiseEstimator::new(&sample, &cfg, opts.k_nodes)?;
    let slices = par::map(&mesh.angles, |&u| {
        let estimate: Vec<f64> = mesh.radii.iter().map(|&r| est.eval(from_polar(HPolar { r, u }))).collect();
        let density = estimate.iter().zip(&mesh.radii).map(|(f, r)| f * r.sinh()).collect();
        AngleSlice { angle: u, estimate, density }
    });
    Ok(ImpedanceDeconv { zc, cutoff, points: sample, mesh: mesh.clone(), slices })
}

/// Points of {i·parallel(R, Z_cap)/Z_c : R ∈ [r_lo, r_hi]}.
pub fn resistor_curve(r_lo: f64, r_hi: f64, z_cap: Complex64, zc: Complex64, samples: usize) -> Result<Vec<HPoint>> {
    (0..samples.max(2))
        .map(|k| {
            let r = r_lo + (r_hi - r_lo) * k as f64 / (samples.max(2) - 1) as f64;
            impedance_to_h(Impedance(parallel(Complex64::new(r, 0.0), z_cap)?), zc)
        })
        .collect()
}
