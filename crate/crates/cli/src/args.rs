use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "hypdeconv", version, about = "Möbius deconvolution on the hyperbolic upper half plane")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Every subcommand's settings; serialized verbatim into the run manifest
/// (output directory excluded) so that `replay` can re-run it.
#[derive(Debug, Clone, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Draw X from a radial law and Y = M_ε(X) with Gaussian errors.
    Simulate(SimulateArgs),
    /// Estimate the density of X from a Y-sample.
    Deconvolve(DeconvolveArgs),
    /// Monte Carlo MISE against sample size.
    Rates(RatesArgs),
    /// Deconvolve impedance measurements on a polar mesh.
    Impedance(ImpedanceArgs),
    /// Re-run the command recorded in a manifest.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Deconvolve(_) => "deconvolve",
            Command::Rates(_) => "rates",
            Command::Impedance(_) => "impedance",
            Command::Replay(_) => "replay",
        }
    }

    pub fn out(&self) -> Option<&PathBuf> {
        match self {
            Command::Simulate(a) => a.out.as_ref(),
            Command::Deconvolve(a) => a.out.as_ref(),
            Command::Rates(a) => a.out.as_ref(),
            Command::Impedance(a) => a.out.as_ref(),
            Command::Replay(a) => Some(&a.out),
        }
    }

    pub fn set_out(&mut self, out: PathBuf) {
        match self {
            Command::Simulate(a) => a.out = Some(out),
            Command::Deconvolve(a) => a.out = Some(out),
            Command::Rates(a) => a.out = Some(out),
            Command::Impedance(a) => a.out = Some(out),
            Command::Replay(a) => a.out = out,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dist {
    Gaussian,
    Laplace,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    pub dist: Dist,
    /// Gaussian parameter of X.
    #[arg(long, default_value_t = 0.1)]
    pub rho: f64,
    /// Laplace shape of X.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Laplace shift of X.
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub rho_eps: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, required = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weight {
    Unbiased,
    Displayed,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DeconvolveArgs {
    /// Y-sample CSV with columns re,im.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// gaussian:RHO or laplace:ALPHA,TAU.
    #[arg(long)]
    pub error: String,
    /// cv, rate or fixed:T.
    #[arg(long, default_value = "cv")]
    pub cutoff: String,
    #[arg(long, default_value_t = 3.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 301)]
    pub r_points: usize,
    #[arg(long, value_enum, default_value = "unbiased")]
    pub cv_weight: Weight,
    /// Average the CV criterion over this many rotations (0: invariant form).
    #[arg(long, default_value_t = 0)]
    pub cv_rotations: usize,
    /// Known density of X for a truth column: gaussian:RHO, laplace:ALPHA,TAU or f0:A.
    #[arg(long)]
    pub truth: Option<String>,
    /// Clip negative values and renormalize.
    #[arg(long)]
    pub nonnegative: bool,
    #[arg(long, required = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateCutoff {
    Rate,
    Cv,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct RatesArgs {
    #[arg(long, value_delimiter = ',', default_value = "100,1000,10000")]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    /// Gaussian parameter of X.
    #[arg(long, default_value_t = 0.1)]
    pub rho: f64,
    /// Error law.
    #[arg(long, value_enum, default_value = "gaussian")]
    pub error_dist: Dist,
    #[arg(long, default_value_t = 0.05)]
    pub rho_eps: f64,
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, value_enum, default_value = "rate")]
    pub cutoff: RateCutoff,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, required = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ImpedanceArgs {
    /// Measurements CSV with columns freq_hz,re_ohm,im_ohm.
    #[arg(long = "in", conflicts_with = "simulate_fulda", required_unless_present = "simulate_fulda")]
    pub input: Option<PathBuf>,
    /// Simulate this many resistor-through-capacitor measurements.
    #[arg(long)]
    pub simulate_fulda: Option<usize>,
    #[arg(long, default_value_t = 0.0004)]
    pub rho_eps: f64,
    /// euclidean-mean, RE or RE,IM (ohms).
    #[arg(long, default_value = "euclidean-mean")]
    pub zc: String,
    /// ANGLES,RADII.
    #[arg(long, default_value = "16,24")]
    pub mesh: String,
    #[arg(long, default_value_t = 0.01)]
    pub mesh_r_min: f64,
    #[arg(long, default_value_t = 1.5)]
    pub mesh_r_max: f64,
    /// scale (T = 1/(2√ρ_ε)), cv or fixed:T.
    #[arg(long, default_value = "scale")]
    pub cutoff: String,
    #[arg(long, default_value_t = 128)]
    pub k_nodes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, required = true)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}
