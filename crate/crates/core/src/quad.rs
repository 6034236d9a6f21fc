//! Quadrature rules: Gauss–Legendre (single and composite panels) and an
//! adaptive Gauss–Kronrod 7/15 integrator.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the rule by Newton iteration on P_n from the Chebyshev-type
    /// initial guess. Accurate to machine precision for n up to a few hundred.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Maps the rule to [a, b], returning (nodes, weights).
    pub fn on_interval(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let x = self.nodes.iter().map(|t| mid + half * t).collect();
        let w = self.weights.iter().map(|w| half * w).collect();
        (x, w)
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let s: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(t, w)| w * f(mid + half * t))
            .sum();
        s * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A fixed set of quadrature nodes with weights, typically built from
/// Gauss–Legendre panels between breakpoints.
#[derive(Debug, Clone, Default)]
pub struct NodeSet {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl NodeSet {
    /// Composite Gauss–Legendre rule with `order` nodes on every interval
    /// between consecutive `breaks`.
    pub fn panels(breaks: &[f64], order: usize) -> Self {
        let rule = GaussLegendre::new(order);
        let mut nodes = Vec::with_capacity(order * breaks.len());
        let mut weights = Vec::with_capacity(order * breaks.len());
        for w in breaks.windows(2) {
            let (x, wt) = rule.on_interval(w[0], w[1]);
            nodes.extend(x);
            weights.extend(wt);
        }
        Self { nodes, weights }
    }

    /// Equal-width panels on [a, b] with width at most `max_width`.
    pub fn uniform_panels(a: f64, b: f64, max_width: f64, order: usize) -> Self {
        let count = (((b - a) / max_width).ceil() as usize).max(1);
        let breaks: Vec<f64> = (0..=count)
            .map(|k| a + (b - a) * k as f64 / count as f64)
            .collect();
        Self::panels(&breaks, order)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod 7/15 on [a, b] to the given absolute or relative
/// tolerance (whichever is looser).
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<f64> {
    const MAX_INTERVALS: usize = 4000;
    let (v, e) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > abs_tol.max(rel_tol * total.abs()) {
        if intervals.len() >= MAX_INTERVALS {
            return Err(Error::Convergence(format!(
                "adaptive quadrature on [{a}, {b}] stalled at error {err:e}"
            )));
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (lo, hi, v0, e0) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        total += v1 + v2 - v0;
        err += e1 + e2 - e0;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
        if (hi - lo) < 1e-14 * (1.0 + lo.abs()) {
            break;
        }
    }
    // recompute from the pieces to shed accumulated rounding
    Ok(intervals.iter().map(|iv| iv.2).sum())
}

/// Integrates f over [a, ∞) by adaptive panels of doubling width until a
/// panel contributes less than `tail_tol` relative to the running total.
pub fn adaptive_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, first_width: f64, tail_tol: f64) -> Result<f64> {
    let mut lo = a;
    let mut width = first_width;
    let mut total = 0.0;
    for _ in 0..200 {
        let piece = adaptive(&f, lo, lo + width, 1e-300, tail_tol * 0.1)?;
        total += piece;
        lo += width;
        if piece.abs() <= tail_tol * total.abs() {
            return Ok(total);
        }
        width *= 1.5;
    }
    Err(Error::Convergence("semi-infinite integral did not settle".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let rule = GaussLegendre::new(8);
        // exact up to degree 15
        let v = rule.integrate(0.0, 2.0, |x| x.powi(15) - 3.0 * x.powi(4));
        let exact = 2f64.powi(16) / 16.0 - 3.0 * 2f64.powi(5) / 5.0;
        assert!((v - exact).abs() < 1e-9 * exact.abs());
        let sum: f64 = rule.weights.iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
    }

    #[test]
    fn high_order_rule_nodes_sorted() {
        let rule = GaussLegendre::new(64);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
        let v = rule.integrate(0.0, PI, f64::sin);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_endpoint_sqrt() {
        let v = adaptive(|x: f64| x.sqrt(), 0.0, 1.0, 1e-13, 1e-13).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn semi_infinite_exponential() {
        let v = adaptive_to_infinity(|x: f64| (-x).exp(), 0.0, 1.0, 1e-13).unwrap();
        assert!((v - 1.0).abs() < 1e-11);
    }

    #[test]
    fn composite_panels_match_single_interval() {
        let set = NodeSet::uniform_panels(0.0, 3.0, 0.5, 10);
        assert_eq!(set.len(), 60);
        let v = set.integrate(|x| (-x * x).exp());
        let reference = adaptive(|x: f64| (-x * x).exp(), 0.0, 3.0, 1e-15, 1e-15).unwrap();
        assert!((v - reference).abs() < 1e-14);
    }
}
