//! Points of the upper half plane, SL(2,ℝ) and its Möbius action, hyperbolic
//! distance, polar coordinates about `i`, and the Cayley maps between the
//! half plane, the unit disk and the right half plane.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

const DET_TOL: f64 = 1e-9;

/// A point z = re + i·im with im > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    re: f64,
    im: f64,
}

impl HPoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(im > 0.0) || !re.is_finite() || !im.is_finite() {
            return Err(Error::NotInUpperHalfPlane { re, im });
        }
        Ok(Self { re, im })
    }

    pub const I: HPoint = HPoint { re: 0.0, im: 1.0 };

    /// The point e^{-r} i on the imaginary axis at distance r below i.
    pub fn on_axis(r: f64) -> Self {
        Self { re: 0.0, im: (-r).exp() }
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// A real 2×2 matrix [[a, b], [c, d]] with ad − bc = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SL2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl SL2 {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !((det - 1.0).abs() <= DET_TOL) {
            return Err(Error::NotUnimodular { det });
        }
        Ok(Self { a, b, c, d })
    }

    pub const IDENTITY: SL2 = SL2 { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    /// The rotation k_u = [[cos u, sin u], [−sin u, cos u]] fixing i.
    pub fn rotation(u: f64) -> Self {
        let (s, c) = u.sin_cos();
        Self { a: c, b: s, c: -s, d: c }
    }

    /// R_r = diag(e^{−r/2}, e^{r/2}), which maps i to e^{−r} i.
    pub fn radial(r: f64) -> Self {
        Self { a: (-0.5 * r).exp(), b: 0.0, c: 0.0, d: (0.5 * r).exp() }
    }

    pub fn translation(b: f64) -> Self {
        Self { a: 1.0, b, c: 0.0, d: 1.0 }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// Matrix product self · other, renormalized by √det against drift.
    pub fn compose(&self, other: &SL2) -> SL2 {
        let m = SL2 {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        };
        m.renormalized()
    }

    pub fn inverse(&self) -> SL2 {
        SL2 { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    fn renormalized(self) -> SL2 {
        let det = self.det();
        if det > 0.0 && det != 1.0 {
            let s = det.sqrt().recip();
            SL2 { a: self.a * s, b: self.b * s, c: self.c * s, d: self.d * s }
        } else {
            self
        }
    }

    /// Largest entrywise difference, used as an operator-distance proxy.
    pub fn max_abs_diff(&self, other: &SL2) -> f64 {
        [self.a - other.a, self.b - other.b, self.c - other.c, self.d - other.d]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Operator (spectral) norm of self − other.
    pub fn operator_distance(&self, other: &SL2) -> f64 {
        let (p, q, r, s) = (self.a - other.a, self.b - other.b, self.c - other.c, self.d - other.d);
        let fro2 = p * p + q * q + r * r + s * s;
        let det = p * s - q * r;
        let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0);
        (0.5 * (fro2 + disc.sqrt())).sqrt()
    }
}

/// Applies z ↦ (az + b)/(cz + d).
pub fn mobius_apply(g: &SL2, z: HPoint) -> HPoint {
    let (x, y) = (z.re, z.im);
    let den_re = g.c * x + g.d;
    let den_im = g.c * y;
    let den2 = den_re * den_re + den_im * den_im;
    let re = ((g.a * x + g.b) * den_re + g.a * g.c * y * y) / den2;
    let im = y * g.det() / den2;
    HPoint { re, im }
}

/// cosh d(z, w) − 1 = |z − w|² / (2 Im z Im w).
fn cosh_distance_minus_one(z: HPoint, w: HPoint) -> f64 {
    let dx = z.re - w.re;
    let dy = z.im - w.im;
    (dx * dx + dy * dy) / (2.0 * z.im * w.im)
}

/// acosh(1 + x) without cancellation for small x.
pub(crate) fn acosh1p(x: f64) -> f64 {
    let x = x.max(0.0);
    (x + (x * (x + 2.0)).sqrt()).ln_1p()
}

pub fn hyperbolic_distance(z: HPoint, w: HPoint) -> f64 {
    acosh1p(cosh_distance_minus_one(z, w))
}

/// Distance from the cross ratio c(z, z̄, w, w̄) = |z − w|² / |z − w̄|²:
/// d = log((1 + √c)/(1 − √c)). Kept as a cross-check of [`hyperbolic_distance`].
pub fn cross_ratio_distance(z: HPoint, w: HPoint) -> f64 {
    let zc = z.to_complex();
    let wc = w.to_complex();
    let c = ((zc - wc) * (zc.conj() - wc.conj())) / ((zc - wc.conj()) * (zc.conj() - wc));
    let root = c.norm().sqrt();
    ((1.0 + root) / (1.0 - root)).ln()
}

/// Hyperbolic polar coordinates about i: z = k_u(e^{−r} i).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HPolar {
    pub r: f64,
    pub u: f64,
}

impl HPolar {
    pub fn new(r: f64, u: f64) -> Result<Self> {
        if !(r >= 0.0) || !u.is_finite() {
            return Err(Error::InvalidParameter(format!("polar pair ({r}, {u})")));
        }
        Ok(Self { r, u })
    }

    /// Canonical representative: u ∈ [0, π) for r > 0, u = 0 at the pole.
    pub fn canonical(self) -> Self {
        if self.r == 0.0 {
            Self { r: 0.0, u: 0.0 }
        } else {
            Self { r: self.r, u: self.u.rem_euclid(PI) }
        }
    }
}

pub fn to_polar(z: HPoint) -> HPolar {
    let r = hyperbolic_distance(z, HPoint::I);
    if r == 0.0 {
        return HPolar { r: 0.0, u: 0.0 };
    }
    let two_u = (2.0 * z.re).atan2(1.0 - z.re * z.re - z.im * z.im);
    HPolar { r, u: (0.5 * two_u).rem_euclid(PI) }
}

pub fn from_polar(p: HPolar) -> HPoint {
    let (s2, c2) = (2.0 * p.u).sin_cos();
    let (sh, ch) = (p.r.sinh(), p.r.cosh());
    let den = ch + c2 * sh;
    HPoint { re: s2 * sh / den, im: 1.0 / den }
}

/// Polar decomposition g = k_u R_r k_{u2} of an SL(2,ℝ) element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SL2Polar {
    pub u: f64,
    pub r: f64,
    pub u2: f64,
}

pub fn sl2_from_polar(p: SL2Polar) -> SL2 {
    SL2::rotation(p.u)
        .compose(&SL2::radial(p.r))
        .compose(&SL2::rotation(p.u2))
}

/// Decomposes g; u is canonical in [0, π) (0 when r = 0) and u2 ∈ [0, 2π)
/// absorbs the sign ambiguity k_{u+π} = −k_u.
pub fn sl2_to_polar(g: &SL2) -> SL2Polar {
    let hp = to_polar(mobius_apply(g, HPoint::I));
    let rest = SL2::radial(-hp.r)
        .compose(&SL2::rotation(-hp.u))
        .compose(g);
    let u2 = rest.b.atan2(rest.a).rem_euclid(TAU);
    SL2Polar { u: hp.u, r: hp.r, u2 }
}

/// Distance R from i of e^{s} k_{−φ}(e^{−r} i), via
/// cosh R = cosh r cosh s − cos(2φ) sinh r sinh s.
pub fn geodesic_radius(r: f64, s: f64, phi: f64) -> f64 {
    let half = 0.5 * (r - s);
    let sin_phi = phi.sin();
    let x = 2.0 * half.sinh().powi(2) + 2.0 * sin_phi * sin_phi * r.sinh() * s.sinh();
    acosh1p(x)
}

/// w = (z − i)/(z + i), upper half plane → unit disk.
pub fn cayley(z: HPoint) -> Complex64 {
    let zc = z.to_complex();
    (zc - Complex64::i()) / (zc + Complex64::i())
}

/// z = i(1 + w)/(1 − w), unit disk → upper half plane.
pub fn inverse_cayley(w: Complex64) -> Result<HPoint> {
    if !(w.norm() < 1.0) {
        return Err(Error::Domain(format!("{w} is not inside the unit disk")));
    }
    let z = Complex64::i() * (1.0 + w) / (1.0 - w);
    Ok(HPoint { re: z.re, im: z.im.max(f64::MIN_POSITIVE) })
}

/// ζ = −i z, upper half plane → right half plane.
pub fn halfplane_to_righthalf(z: HPoint) -> Complex64 {
    -Complex64::i() * z.to_complex()
}

/// z = i ζ, right half plane → upper half plane.
pub fn righthalf_to_halfplane(zeta: Complex64) -> Result<HPoint> {
    if !(zeta.re > 0.0) {
        return Err(Error::Domain(format!("{zeta} is not in the right half plane")));
    }
    HPoint::from_complex(Complex64::i() * zeta)
}

/// w = (ζ − 1)/(ζ + 1), right half plane → unit disk.
pub fn righthalf_to_disk(zeta: Complex64) -> Result<Complex64> {
    if !(zeta.re > 0.0) {
        return Err(Error::Domain(format!("{zeta} is not in the right half plane")));
    }
    Ok((zeta - 1.0) / (zeta + 1.0))
}

/// ζ = (1 + w)/(1 − w), unit disk → right half plane.
pub fn disk_to_righthalf(w: Complex64) -> Result<Complex64> {
    if !(w.norm() < 1.0) {
        return Err(Error::Domain(format!("{w} is not inside the unit disk")));
    }
    Ok((1.0 + w) / (1.0 - w))
}
