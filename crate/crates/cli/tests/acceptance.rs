//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails.

use hypdeconv::deconv::{
    cv_cutoff, cv_t_grid, estimate_radial, identity_error, mise, rate_cutoff_quartic, spectral_sq_distance, spectral_tail,
    CvConfig, DeconvConfig,
};
use hypdeconv::distributions::{
    apply_error, f0_density, gaussian_law, gaussian_radial_density, gaussian_spectral, laplace_radial_unnormalized,
    laplace_spectral, ErrorModel,
};
use hypdeconv::geometry::{
    from_polar, geodesic_radius, hyperbolic_distance, mobius_apply, sl2_from_polar, sl2_to_polar, to_polar, HPoint, HPolar,
    SL2Polar, SL2,
};
use hypdeconv::hft::{
    convolve_radial_oracle, forward_radial, inverse_values, l2_norm_radial, plancherel_norm, radial_grid, spectral_weight,
    RadialDensity, SpectralGrid,
};
use hypdeconv::impedance::{deconvolve_impedances, resistor_curve, simulate_fulda, FuldaConfig, ImpedanceOptions, PolarMesh};
use hypdeconv::quad::NodeSet;
use hypdeconv::rng::derive_seed;
use hypdeconv::specfun::{conical_p, elliptic_k, ConicalEvalConfig};
use hypdeconv::stats::{ks_statistic, median};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn c1_rate_values() -> Verdict {
    let want = [(100, 2.19), (1000, 2.42), (10_000, 2.61)];
    let got: Vec<f64> = want.iter().map(|&(n, _)| rate_cutoff_quartic(n, 0.05).unwrap()).collect();
    let pass = want.iter().zip(&got).all(|(&(_, w), g)| (g - w).abs() <= 0.005);
    verdict(pass, format!("T = {:.4}, {:.4}, {:.4} (want 2.19, 2.42, 2.61 ± 0.005)", got[0], got[1], got[2]))
}

fn c2_convolution() -> Verdict {
    let f_err = gaussian_law(0.05).unwrap();
    let f_x = gaussian_law(0.1).unwrap();
    let r_max = hypdeconv::distributions::gaussian_r_max(0.15);
    let conv = convolve_radial_oracle(f_err.density(), f_x.density(), &radial_grid(r_max, 300)).unwrap();
    let grid = SpectralGrid::standard(5.0).unwrap();
    let spec = forward_radial(&conv, &grid).unwrap();
    // one-time calibration: the constant that gives the convolution unit mass
    let calibration = 1.0 / conv.mass();
    let (mut num, mut den) = (0.0, 0.0);
    for (k, &t) in grid.t().iter().enumerate() {
        let w = grid.weights()[k] * spectral_weight(t);
        let product = gaussian_spectral(0.05, t) * gaussian_spectral(0.1, t);
        num += w * (calibration * spec.values()[k].re - product).powi(2);
        den += w * product * product;
    }
    let rel = (num / den).sqrt();
    verdict(rel < 1e-2, format!("relative L² error {rel:.2e} on |t| ≤ 5 (limit 1e-2), calibration factor {calibration:.6}"))
}

fn c3_heat_semigroup() -> Verdict {
    let n = 100_000;
    let xs = gaussian_law(0.1).unwrap().sample_h(n, 31).unwrap();
    let eps = ErrorModel::gaussian(0.05).unwrap().sample_sl2(n, 32).unwrap();
    let ys = apply_error(&eps, &xs).unwrap();
    let radii: Vec<f64> = ys.points().iter().map(|&y| hyperbolic_distance(y, HPoint::I)).collect();
    let law = gaussian_law(0.15).unwrap();
    let ks = ks_statistic(&radii, |r| law.cdf(r));
    verdict(ks < 0.02, format!("KS distance {ks:.4} between radii of Y and g̃_0.15 (limit 0.02, n = {n})"))
}

fn c4_plancherel() -> Verdict {
    let mut lines = Vec::new();
    let mut pass = true;
    let mut check = |name: &str, r_side: f64, s_side: f64| {
        let rel = (r_side * r_side - s_side * s_side).abs() / (s_side * s_side);
        pass &= rel < 0.01;
        lines.push(format!("{name} {rel:.1e}"));
    };
    let g = gaussian_law(0.1).unwrap();
    let g_spec = forward_radial(g.density(), &SpectralGrid::standard(20.0).unwrap()).unwrap();
    check("g_0.1", l2_norm_radial(g.density()), plancherel_norm(&g_spec));

    // f₀ ∝ cosh^{−2} r: f·P·sinh r ~ e^{−3r/2} and Hf₀ ~ e^{−πt/2}
    let f0 = f0_density(2.0, &radial_grid(20.0, 600)).unwrap();
    let f0_spec = forward_radial(&f0, &SpectralGrid::standard(12.0).unwrap()).unwrap();
    check("f0(a=2)", l2_norm_radial(&f0), plancherel_norm(&f0_spec));

    // h_{2,0}: inverse of (1/4 + t²)^{−2} in r, against the closed profile in t
    let t_cut = 40.0;
    let r_grid: Vec<f64> = (0..=200).map(|k| 30.0 * (k as f64 / 200.0).powf(1.5)).collect();
    let h = laplace_radial_unnormalized(2.0, 0.0, &r_grid, t_cut).unwrap();
    let s_side = (NodeSet::uniform_panels(0.0, t_cut, 0.5, 12).integrate(|t| laplace_spectral(2.0, 0.0, t).powi(2) * spectral_weight(t))
        / TAU)
        .sqrt();
    check("h_2,0", l2_norm_radial(&h), s_side);
    verdict(pass, format!("relative differences of ‖f‖²: {} (limit 1e-2)", lines.join(", ")))
}

fn c5_legendre() -> Verdict {
    let cfg = ConicalEvalConfig::default();
    let mut worst = 0.0f64;
    for r in [0.1, 0.5, 1.0, 2.0, 5.0] {
        let p = conical_p(0.0, r, &cfg).unwrap();
        let k = 2.0 / (PI * (0.5 * r).cosh()) * elliptic_k((0.5 * r).tanh()).unwrap();
        worst = worst.max((p - k).abs());
    }
    verdict(worst < 1e-8, format!("max |P_(-1/2)(cosh r) − elliptic form| = {worst:.1e} (limit 1e-8)"))
}

fn spectral_mise(ys: &hypdeconv::hft::Sample, error: &ErrorModel, t: f64) -> f64 {
    let res = estimate_radial(ys, &DeconvConfig::new(t, error.clone(), vec![0.0, 1.0]).unwrap()).unwrap();
    spectral_sq_distance(&res.quotient, |s| gaussian_spectral(0.1, s), t + 40.0)
}

fn c6_figure3() -> Verdict {
    let error = ErrorModel::gaussian(0.05).unwrap();
    let law = gaussian_law(0.1).unwrap();
    let mut medians = Vec::new();
    let mut cutoffs = Vec::new();
    let (mut dist_big, mut dist_naive) = (Vec::new(), Vec::new());
    for (i, &n) in [100usize, 1000, 10_000].iter().enumerate() {
        let mut mises = Vec::new();
        let mut ts = Vec::new();
        for rep in 0..20u64 {
            let seed = derive_seed(600 + i as u64, rep);
            let xs = law.sample_h(n, derive_seed(seed, 1)).unwrap();
            let ys = apply_error(&error.sample_sl2(n, derive_seed(seed, 2)).unwrap(), &xs).unwrap();
            let t = cv_cutoff(&ys, &error, &cv_t_grid(&error, n).unwrap(), &CvConfig::default()).unwrap().selected;
            let m = spectral_mise(&ys, &error, t);
            mises.push(m);
            ts.push(t);
            if n == 10_000 {
                dist_big.push(m.sqrt());
                let naive_err = identity_error(60.0).unwrap();
                let tn = cv_cutoff(&ys, &naive_err, &cv_t_grid(&naive_err, n).unwrap(), &CvConfig::default()).unwrap().selected;
                dist_naive.push(spectral_mise(&ys, &naive_err, tn).sqrt());
            }
        }
        medians.push(median(&mises));
        cutoffs.push(median(&ts));
    }
    let decreasing = medians[0] > medians[1] && medians[1] > medians[2];
    let ratio = median(&dist_big) / median(&dist_naive);
    verdict(
        decreasing && ratio < 0.5,
        format!(
            "median MISE {:.4} > {:.4} > {:.4} (median CV T {:.2}, {:.2}, {:.2}); n = 10000 distance {:.4} vs naive {:.4}, ratio {:.2} (limit 0.5)",
            medians[0],
            medians[1],
            medians[2],
            cutoffs[0],
            cutoffs[1],
            cutoffs[2],
            median(&dist_big),
            median(&dist_naive),
            ratio
        ),
    )
}

fn c7_variance_bias() -> Verdict {
    let (n, t, reps) = (500, 2.0, 100);
    let error = ErrorModel::gaussian(0.05).unwrap();
    let law = gaussian_law(0.1).unwrap();
    let r_grid = radial_grid(8.0, 400);
    let truth = gaussian_radial_density(0.1, &r_grid).unwrap();
    // E f̂ has transform Hf_Y/E · 1_band = Hf_X · 1_band
    let cfg = DeconvConfig::new(t, error.clone(), r_grid.clone()).unwrap();
    let band = hypdeconv::hft::SpectralFunction::from_real_fn(cfg.spectral_grid().unwrap(), |s| gaussian_spectral(0.1, s));
    let mean_est = RadialDensity::new(r_grid.clone(), inverse_values(&band, &r_grid).unwrap()).unwrap();
    let (mut mse, mut var) = (0.0, 0.0);
    for rep in 0..reps {
        let seed = derive_seed(700, rep);
        let xs = law.sample_h(n, derive_seed(seed, 1)).unwrap();
        let ys = apply_error(&error.sample_sl2(n, derive_seed(seed, 2)).unwrap(), &xs).unwrap();
        let est = estimate_radial(&ys, &cfg).unwrap().estimate;
        mse += mise(&est, &truth) / reps as f64;
        var += mise(&est, &mean_est) / reps as f64;
    }
    let bias = mise(&mean_est, &truth);
    let rel = (var + bias - mse).abs() / mse;
    let tails: Vec<f64> = [1.0, 2.0, 3.0, 4.0].iter().map(|&c| spectral_tail(&|s| gaussian_spectral(0.1, s), c, c + 40.0)).collect();
    let monotone = tails.windows(2).all(|w| w[1] < w[0]);
    verdict(
        rel < 0.03 && monotone,
        format!(
            "variance {var:.5} + bias² {bias:.5} vs MSE {mse:.5}: relative gap {rel:.2e} (limit 3e-2); bias² at T = 1..4: {:.4}, {:.4}, {:.4}, {:.5}",
            tails[0], tails[1], tails[2], tails[3]
        ),
    )
}

fn random_sl2(g: &mut ChaCha8Rng) -> SL2 {
    let a: f64 = g.gen_range(0.3..3.0);
    let (b, c): (f64, f64) = (g.gen_range(-3.0..3.0), g.gen_range(-3.0..3.0));
    SL2::new(a, b, c, (1.0 + b * c) / a).unwrap()
}

fn random_point(g: &mut ChaCha8Rng) -> HPoint {
    HPoint::new(g.gen_range(-4.0..4.0), g.gen_range(0.05..5.0)).unwrap()
}

fn c8_geometry() -> Verdict {
    let mut g = ChaCha8Rng::seed_from_u64(8);
    let mut iso = 0.0f64;
    for _ in 0..1000 {
        let m = random_sl2(&mut g);
        let (z, w) = (random_point(&mut g), random_point(&mut g));
        let d = hyperbolic_distance(z, w);
        let dm = hyperbolic_distance(mobius_apply(&m, z), mobius_apply(&m, w));
        iso = iso.max((d - dm).abs() / (1.0 + d));
    }
    let mut bounds_ok = true;
    for _ in 0..10_000 {
        let (r, s, phi) = (g.gen_range(0.0..6.0), g.gen_range(0.0..6.0), g.gen_range(0.0..TAU));
        let big_r = geodesic_radius(r, s, phi);
        bounds_ok &= big_r >= (r - s).abs() - 1e-12 && big_r <= r + s + 1e-12;
    }
    let mut polar = 0.0f64;
    for _ in 0..1000 {
        let z = random_point(&mut g);
        let back = from_polar(to_polar(z));
        polar = polar.max((back.to_complex() - z.to_complex()).norm() / (1.0 + z.to_complex().norm()));
        let p = HPolar::new(g.gen_range(0.0..5.0), g.gen_range(0.0..PI)).unwrap();
        let q = to_polar(from_polar(p));
        polar = polar.max((q.r - p.r).abs());
        let m = random_sl2(&mut g);
        let mm = sl2_from_polar(sl2_to_polar(&m));
        polar = polar.max(m.max_abs_diff(&mm) / (1.0 + m.a.abs().max(m.b.abs()).max(m.c.abs()).max(m.d.abs())));
        let sp = SL2Polar { u: g.gen_range(0.0..PI), r: g.gen_range(0.01..4.0), u2: g.gen_range(0.0..PI) };
        polar = polar.max(sl2_from_polar(sl2_to_polar(&sl2_from_polar(sp))).max_abs_diff(&sl2_from_polar(sp)));
    }
    verdict(
        iso < 1e-9 && bounds_ok && polar < 1e-9,
        format!("isometry defect {iso:.1e}, radius bounds {}, polar round trip {polar:.1e} (limits 1e-9)", if bounds_ok { "hold" } else { "violated" }),
    )
}

fn c9_impedance() -> Verdict {
    let sim = simulate_fulda(&FuldaConfig::new(1000, 0.0004, 9)).unwrap();
    let mesh = PolarMesh::default();
    let res = deconvolve_impedances(&sim.measurements, &ImpedanceOptions::new(0.0004), &mesh).unwrap();
    let curve = resistor_curve(13.5, 17.7, sim.mean_capacitor(), res.zc, 2000).unwrap();
    let weights = mesh.cell_weights();
    let (mut tot, mut near, mut area_tot, mut area_near) = (0.0, 0.0, 0.0, 0.0);
    for (a, slice) in res.slices.iter().enumerate() {
        for k in 0..mesh.radii.len() {
            let p = mesh.point(a, k);
            let close = curve.iter().map(|&q| hyperbolic_distance(p, q)).fold(f64::INFINITY, f64::min) < 0.15;
            let m = slice.density[k].max(0.0);
            let am = slice.estimate[k].max(0.0) * weights[k];
            tot += m;
            area_tot += am;
            if close {
                near += m;
                area_near += am;
            }
        }
    }
    let frac = near / tot;
    verdict(
        frac >= 0.6,
        format!(
            "{:.1}% of positive density × measure on the mesh lies within 0.15 of the resistor curve (limit 60%); T = {:.1}; cell-area weighted: {:.1}%",
            100.0 * frac,
            res.cutoff,
            100.0 * area_near / area_tot
        ),
    )
}

fn run_cli(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_hypdeconv")).args(args).output().map(|o| o.status.success()).unwrap_or(false)
}

fn dir_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != "timings.json")
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect();
    out.sort();
    out
}

fn c10_determinism() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let p = |s: &str| tmp.path().join(s).to_string_lossy().into_owned();
    let y = p("a_sim/y.csv");
    let commands: Vec<(&str, Vec<String>)> = vec![
        ("simulate", vec!["simulate", "--n", "1000", "--seed", "7", "--out"].into_iter().map(String::from).collect()),
        (
            "deconvolve",
            ["deconvolve", "--in", &y, "--error", "gaussian:0.05", "--cutoff", "cv", "--truth", "gaussian:0.1", "--out"]
                .into_iter()
                .map(String::from)
                .collect(),
        ),
        ("rates", ["rates", "--n-list", "100,300", "--reps", "3", "--seed", "5", "--out"].into_iter().map(String::from).collect()),
        (
            "impedance",
            ["impedance", "--simulate-fulda", "200", "--mesh", "4,6", "--k-nodes", "32", "--seed", "2", "--out"]
                .into_iter()
                .map(String::from)
                .collect(),
        ),
    ];
    let mut failures = Vec::new();
    for (name, args) in &commands {
        for run in ["a", "b"] {
            let mut full: Vec<String> = args.clone();
            full.push(p(&format!("{run}_{}", if *name == "simulate" { "sim".to_string() } else { name.to_string() })));
            let refs: Vec<&str> = full.iter().map(String::as_str).collect();
            if !run_cli(&refs) {
                failures.push(format!("{name} run {run} failed"));
            }
        }
        let dir = |run: &str| tmp.path().join(format!("{run}_{}", if *name == "simulate" { "sim" } else { name }));
        if dir_files(&dir("a")) != dir_files(&dir("b")) {
            failures.push(format!("{name} outputs differ"));
        }
    }
    let manifest = p("a_deconvolve/manifest.json");
    let replay_out = p("replay");
    if !run_cli(&["replay", "--manifest", &manifest, "--out", &replay_out]) {
        failures.push("replay failed".into());
    } else if dir_files(&tmp.path().join("replay")) != dir_files(&tmp.path().join("a_deconvolve")) {
        failures.push("replay differs".into());
    }
    let pass = failures.is_empty();
    let detail = if pass {
        "simulate, deconvolve, rates, impedance and replay outputs byte-identical across runs".to_string()
    } else {
        failures.join("; ")
    };
    verdict(pass, detail)
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("rate-formula values", c1_rate_values),
        ("convolution theorem", c2_convolution),
        ("heat semigroup", c3_heat_semigroup),
        ("Plancherel", c4_plancherel),
        ("Legendre identity", c5_legendre),
        ("MISE decreases with n", c6_figure3),
        ("variance-bias decomposition", c7_variance_bias),
        ("geometry invariants", c8_geometry),
        ("impedance reenactment", c9_impedance),
        ("CLI determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = f();
        if !v.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} [{}]: {} ({}; {:.1} s)",
            i + 1,
            name,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
