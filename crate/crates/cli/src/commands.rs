use crate::args::{Command, DeconvolveArgs, Dist, ImpedanceArgs, RateCutoff, RatesArgs, SimulateArgs, Weight};
use crate::error::CliError;
use crate::manifest::{Manifest, Timings};
use hypdeconv::deconv::{
    cv_cutoff, cv_t_grid, default_rate_cutoff, estimate_radial, spectral_sq_distance, CvConfig, CvForm, DeconvConfig,
    LooWeight,
};
use hypdeconv::distributions::{
    apply_error, f0_density, gaussian_law, gaussian_radial_density, gaussian_spectral, laplace_radial, sample_gaussian_h,
    sample_laplace, ErrorModel,
};
use hypdeconv::hft::{radial_grid, RadialDensity, Sample};
use hypdeconv::impedance::{
    deconvolve_impedances, simulate_fulda, FuldaConfig, ImpedanceCutoff, ImpedanceOptions, MeasurementSet, PolarMesh, ZcMethod,
};
use hypdeconv::rng::derive_seed;
use hypdeconv::stats::{median, quantile};
use num_complex::Complex64;
use serde_json::json;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

struct Outcome {
    seed: Option<u64>,
    outputs: Vec<String>,
    results: serde_json::Value,
    stages: Vec<(String, f64)>,
}

pub fn run(command: Command) -> Result<(), CliError> {
    if let Command::Replay(r) = &command {
        let mut replayed = Manifest::read(&r.manifest)?.parameters;
        if matches!(replayed, Command::Replay(_)) {
            return Err(CliError::Usage("a manifest cannot record a replay".into()));
        }
        replayed.set_out(r.out.clone());
        return run(replayed);
    }
    let out = command.out().cloned().ok_or_else(|| CliError::Usage("--out is required".into()))?;
    fs::create_dir_all(&out)?;
    let start = Instant::now();
    let outcome = match &command {
        Command::Simulate(a) => simulate(a, &out)?,
        Command::Deconvolve(a) => deconvolve(a, &out)?,
        Command::Rates(a) => rates(a, &out)?,
        Command::Impedance(a) => impedance(a, &out)?,
        Command::Replay(_) => unreachable!(),
    };
    Manifest::new(&command, outcome.seed, outcome.outputs, outcome.results).write(&out)?;
    let timings = Timings { total_seconds: start.elapsed().as_secs_f64(), stages: outcome.stages.into_iter().collect() };
    timings.write(&out)
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn simulate(a: &SimulateArgs, out: &Path) -> Result<Outcome, CliError> {
    if a.n == 0 {
        return Err(usage("--n must be positive"));
    }
    let t0 = Instant::now();
    let xs = match a.dist {
        Dist::Gaussian => sample_gaussian_h(a.rho, a.n, derive_seed(a.seed, 1))?,
        Dist::Laplace => {
            let (alpha, tau) = a
                .alpha
                .zip(a.tau)
                .ok_or_else(|| usage("--dist laplace needs --alpha and --tau"))?;
            sample_laplace(alpha, tau, a.n, derive_seed(a.seed, 1))?
        }
    };
    let errors = ErrorModel::gaussian(a.rho_eps)?.sample_sl2(a.n, derive_seed(a.seed, 2))?;
    let ys = apply_error(&errors, &xs)?;
    xs.to_csv(create(out, "x.csv")?)?;
    ys.to_csv(create(out, "y.csv")?)?;
    Ok(Outcome {
        seed: Some(a.seed),
        outputs: vec!["x.csv".into(), "y.csv".into()],
        results: json!({ "n": a.n }),
        stages: vec![("simulate".into(), t0.elapsed().as_secs_f64())],
    })
}

enum Cutoff {
    Cv,
    Rate,
    Fixed(f64),
}

fn parse_cutoff(s: &str) -> Result<Cutoff, CliError> {
    match s {
        "cv" => Ok(Cutoff::Cv),
        "rate" => Ok(Cutoff::Rate),
        _ => match s.strip_prefix("fixed:").map(str::parse::<f64>) {
            Some(Ok(t)) if t > 0.0 => Ok(Cutoff::Fixed(t)),
            _ => Err(usage(format!("--cutoff must be cv, rate or fixed:T with T > 0, got '{s}'"))),
        },
    }
}

fn parse_truth(s: &str, r_grid: &[f64]) -> Result<RadialDensity, CliError> {
    let bad = || usage(format!("cannot parse truth '{s}'"));
    let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
    let nums: Vec<f64> = rest.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?;
    Ok(match (kind, nums.as_slice()) {
        ("gaussian", [rho]) => gaussian_radial_density(*rho, r_grid)?,
        ("laplace", [alpha, tau]) => laplace_radial(*alpha, *tau, r_grid)?,
        ("f0", [a]) => f0_density(*a, r_grid)?,
        _ => return Err(bad()),
    })
}

fn read_sample(path: &Path) -> Result<Sample, CliError> {
    let file = File::open(path).map_err(|e| usage(format!("cannot open {}: {e}", path.display())))?;
    Ok(Sample::from_csv(file)?)
}

fn cv_config(weight: Weight, rotations: usize) -> CvConfig {
    CvConfig {
        form: if rotations == 0 { CvForm::Invariant } else { CvForm::General { k_nodes: rotations } },
        weight: match weight {
            Weight::Unbiased => LooWeight::Unbiased,
            Weight::Displayed => LooWeight::Displayed,
        },
        ..CvConfig::default()
    }
}

fn deconvolve(a: &DeconvolveArgs, out: &Path) -> Result<Outcome, CliError> {
    let error: ErrorModel = a.error.parse().map_err(|e: hypdeconv::Error| usage(e.to_string()))?;
    let cutoff = parse_cutoff(&a.cutoff)?;
    if !(a.r_max > 0.0) || a.r_points < 2 {
        return Err(usage("--r-max must be positive and --r-points at least 2"));
    }
    let sample = read_sample(&a.input)?;
    let r_grid = radial_grid(a.r_max, a.r_points - 1);
    let t0 = Instant::now();
    let mut outputs = vec!["estimate.csv".to_string()];
    let mut cv_json = serde_json::Value::Null;
    let (t, rule) = match cutoff {
        Cutoff::Fixed(t) => (t, "fixed".to_string()),
        Cutoff::Rate => (default_rate_cutoff(&error, sample.len())?, format!("rate ({})", rate_rule_name(&error))),
        Cutoff::Cv => {
            let grid = cv_t_grid(&error, sample.len())?;
            let cv = cv_cutoff(&sample, &error, &grid, &cv_config(a.cv_weight, a.cv_rotations))?;
            let mut w = csv::Writer::from_writer(create(out, "cv.csv")?);
            w.write_record(["t", "criterion"])?;
            for (t, c) in cv.t_grid.iter().zip(&cv.criterion) {
                w.write_record([t.to_string(), c.to_string()])?;
            }
            w.flush()?;
            outputs.push("cv.csv".into());
            cv_json = json!({ "grid_min": cv.t_grid[0], "grid_max": cv.t_grid[cv.t_grid.len() - 1], "points": cv.t_grid.len() });
            (cv.selected, "cv".to_string())
        }
    };
    let t_cv = t0.elapsed().as_secs_f64();
    let mut cfg = DeconvConfig::new(t, error.clone(), r_grid.clone())?;
    cfg.project_nonnegative = a.nonnegative;
    let res = estimate_radial(&sample, &cfg)?;
    let truth = a.truth.as_deref().map(|s| parse_truth(s, &r_grid)).transpose()?;
    res.to_csv(create(out, "estimate.csv")?, truth.as_ref())?;
    Ok(Outcome {
        seed: None,
        outputs,
        results: json!({
            "n": sample.len(),
            "cutoff": t,
            "cutoff_rule": rule,
            "cv": cv_json,
            "amplification_max": res.diagnostics.amplification_max,
            "error": error.to_string(),
        }),
        stages: vec![("cutoff".into(), t_cv), ("estimate".into(), t0.elapsed().as_secs_f64() - t_cv)],
    })
}

fn rate_rule_name(error: &ErrorModel) -> &'static str {
    match error {
        ErrorModel::Gaussian { .. } => "((1/4ρ) ln n)^(1/4)",
        ErrorModel::Laplace { .. } => "n^(1/(2(α+1)))",
        ErrorModel::Custom(_) => "grid limit",
    }
}

fn rates(a: &RatesArgs, out: &Path) -> Result<Outcome, CliError> {
    if a.n_list.is_empty() || a.n_list.iter().any(|&n| n < 2) {
        return Err(usage("--n-list needs sizes of at least 2"));
    }
    if a.reps == 0 {
        return Err(usage("--reps must be positive"));
    }
    let error = match a.error_dist {
        Dist::Gaussian => ErrorModel::gaussian(a.rho_eps)?,
        Dist::Laplace => ErrorModel::laplace(a.alpha, a.tau)?,
    };
    let law = gaussian_law(a.rho)?;
    let t0 = Instant::now();
    let mut rows = Vec::new();
    for (i, &n) in a.n_list.iter().enumerate() {
        let mut mises = Vec::with_capacity(a.reps);
        let mut cutoffs = Vec::with_capacity(a.reps);
        for rep in 0..a.reps {
            let seed = derive_seed(derive_seed(a.seed, i as u64 + 1), rep as u64 + 1);
            let xs = law.sample_h(n, derive_seed(seed, 1))?;
            let ys = apply_error(&error.sample_sl2(n, derive_seed(seed, 2))?, &xs)?;
            let t = match a.cutoff {
                RateCutoff::Rate => default_rate_cutoff(&error, n)?,
                RateCutoff::Cv => {
                    let grid = cv_t_grid(&error, n)?;
                    cv_cutoff(&ys, &error, &grid, &CvConfig::default())?.selected
                }
            };
            let res = estimate_radial(&ys, &DeconvConfig::new(t, error.clone(), vec![0.0, 1.0])?)?;
            let rho = a.rho;
            mises.push(spectral_sq_distance(&res.quotient, |s| gaussian_spectral(rho, s), t + 40.0));
            cutoffs.push(t);
        }
        rows.push((n, mises, median(&cutoffs)));
    }
    let mut w = csv::Writer::from_writer(create(out, "rates.csv")?);
    if a.reps == 1 {
        w.write_record(["n", "cutoff", "mise"])?;
    } else {
        w.write_record(["n", "cutoff", "median_mise", "iqr"])?;
    }
    for (n, mises, t) in &rows {
        if a.reps == 1 {
            w.write_record([n.to_string(), t.to_string(), mises[0].to_string()])?;
        } else {
            let iqr = quantile(mises, 0.75) - quantile(mises, 0.25);
            w.write_record([n.to_string(), t.to_string(), median(mises).to_string(), iqr.to_string()])?;
        }
    }
    w.flush()?;
    Ok(Outcome {
        seed: Some(a.seed),
        outputs: vec!["rates.csv".into()],
        results: json!({ "error": error.to_string(), "sizes": a.n_list.len(), "reps": a.reps }),
        stages: vec![("replications".into(), t0.elapsed().as_secs_f64())],
    })
}

fn parse_zc(s: &str) -> Result<ZcMethod, CliError> {
    if s == "euclidean-mean" {
        return Ok(ZcMethod::EuclideanMean);
    }
    let parts: Vec<f64> = s
        .split(',')
        .map(|x| x.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("--zc must be euclidean-mean, RE or RE,IM, got '{s}'")))?;
    match parts.as_slice() {
        [re] => Ok(ZcMethod::Fixed(Complex64::new(*re, 0.0))),
        [re, im] => Ok(ZcMethod::Fixed(Complex64::new(*re, *im))),
        _ => Err(usage(format!("--zc must be euclidean-mean, RE or RE,IM, got '{s}'"))),
    }
}

fn parse_mesh(a: &ImpedanceArgs) -> Result<PolarMesh, CliError> {
    let parts: Vec<usize> = a
        .mesh
        .split(',')
        .map(|x| x.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("--mesh must be ANGLES,RADII, got '{}'", a.mesh)))?;
    match parts.as_slice() {
        [angles, radii] => PolarMesh::geometric(*angles, *radii, a.mesh_r_min, a.mesh_r_max).map_err(|e| usage(e.to_string())),
        _ => Err(usage(format!("--mesh must be ANGLES,RADII, got '{}'", a.mesh))),
    }
}

fn impedance(a: &ImpedanceArgs, out: &Path) -> Result<Outcome, CliError> {
    let zc = parse_zc(&a.zc)?;
    let mesh = parse_mesh(a)?;
    if !(a.rho_eps > 0.0) {
        return Err(usage("--rho-eps must be positive"));
    }
    let mut outputs = Vec::new();
    let mut rejected = Vec::new();
    let (ms, source) = match (&a.input, a.simulate_fulda) {
        (Some(path), None) => {
            let file = File::open(path).map_err(|e| usage(format!("cannot open {}: {e}", path.display())))?;
            let (ms, rej) = MeasurementSet::from_csv(file, path.display().to_string())?;
            rejected = rej;
            (ms, "csv")
        }
        (None, Some(n)) => {
            if n == 0 {
                return Err(usage("--simulate-fulda must be positive"));
            }
            let sim = simulate_fulda(&FuldaConfig::new(n, a.rho_eps, a.seed))?;
            sim.measurements.to_csv(create(out, "measurements.csv")?)?;
            let mut w = csv::Writer::from_writer(create(out, "resistors.csv")?);
            w.write_record(["r_ohm", "cap_re_ohm", "cap_im_ohm"])?;
            for (r, c) in sim.resistors.iter().zip(&sim.capacitors) {
                w.write_record([r.to_string(), c.re.to_string(), c.im.to_string()])?;
            }
            w.flush()?;
            outputs.push("measurements.csv".to_string());
            outputs.push("resistors.csv".to_string());
            (sim.measurements, "simulated")
        }
        _ => return Err(usage("give exactly one of --in and --simulate-fulda")),
    };
    if !rejected.is_empty() {
        let mut w = csv::Writer::from_writer(create(out, "rejected.csv")?);
        w.write_record(["line", "reason"])?;
        for r in &rejected {
            w.write_record([r.line.to_string(), r.reason.clone()])?;
        }
        w.flush()?;
        outputs.push("rejected.csv".into());
    }
    let t0 = Instant::now();
    let cutoff = match a.cutoff.as_str() {
        "scale" => ImpedanceCutoff::ErrorScale,
        "cv" => ImpedanceCutoff::Cv,
        other => match parse_cutoff(other)? {
            Cutoff::Fixed(t) => ImpedanceCutoff::Fixed(t),
            _ => return Err(usage(format!("--cutoff must be scale, cv or fixed:T, got '{other}'"))),
        },
    };
    let opts = ImpedanceOptions { rho_eps: a.rho_eps, zc, cutoff, k_nodes: a.k_nodes };
    let res = deconvolve_impedances(&ms, &opts, &mesh)?;
    for (k, slice) in res.slices.iter().enumerate() {
        let name = format!("angle_{k:02}.csv");
        slice.to_csv(&mesh.radii, create(out, &name)?)?;
        outputs.push(name);
    }
    Ok(Outcome {
        seed: a.simulate_fulda.map(|_| a.seed),
        outputs,
        results: json!({
            "source": source,
            "n": ms.len(),
            "zc": [res.zc.re, res.zc.im],
            "rho_eps": a.rho_eps,
            "cutoff": res.cutoff,
            "mesh": { "angles": mesh.angles, "radii": mesh.radii },
            "rejected_rows": rejected.len(),
        }),
        stages: vec![("deconvolve".into(), t0.elapsed().as_secs_f64())],
    })
}
