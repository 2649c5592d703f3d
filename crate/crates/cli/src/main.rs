//! `sewn`: command-line driver for the tunnel, sewing, pulling, probe and
//! convergence experiments.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "sewn", version, about = "Sewn and pulled-string sphere experiments")]
struct Cli {
    /// TOML file with parameter values; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build one tunnel curve and summarize its geometry.
    Tunnel(TunnelArgs),
    /// Sew a sampled sphere along a great circle.
    Sew(SewArgs),
    /// Pull the tube around a great circle of a sampled sphere to a point.
    Pull(PullArgs),
    /// Run a sewing schedule against the pulled-string space.
    Converge(ConvergeArgs),
    /// Estimate scalar curvature from ball volumes.
    Probe(ProbeArgs),
}

#[derive(Args, Debug, Default)]
pub struct SampleArgs {
    /// Curvature of the round sphere.
    #[arg(long = "K")]
    pub k: Option<f64>,
    /// Number of sample points.
    #[arg(long = "N")]
    pub points: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Zero-weight nodes placed along the marked great circle.
    #[arg(long)]
    pub curve_nodes: Option<usize>,
}

#[derive(Args, Debug)]
pub struct TunnelArgs {
    #[arg(long = "K")]
    pub k: Option<f64>,
    #[arg(long)]
    pub delta0: Option<f64>,
    #[arg(long)]
    pub alpha_bend: Option<f64>,
    /// Smoothing width; 0 keeps the step profile.
    #[arg(long)]
    pub smooth_width: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub tail_length: Option<f64>,
    /// Ball radius of the tunnel; defaults to 10·delta0.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SewArgs {
    #[command(flatten)]
    pub sample: SampleArgs,
    /// Number of tunnels.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub shell_width: Option<f64>,
    #[arg(long)]
    pub rho_connect: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Space container format: bin or json.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Args, Debug)]
pub struct PullArgs {
    #[command(flatten)]
    pub sample: SampleArgs,
    /// Set to pull; only `geodesic` is supported.
    #[arg(long = "K-set")]
    pub k_set: Option<String>,
    /// Tube radius in units of the curve node spacing.
    #[arg(long)]
    pub a_tube_factor: Option<f64>,
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub sample: SampleArgs,
    /// `sphere`, `pulled`, or a space container path.
    #[arg(long)]
    pub space: Option<String>,
    /// Radius `r` or grid `a:b:step`.
    #[arg(long)]
    pub r: Option<String>,
    /// `all` (mean over every point), `p0`, or a point index.
    #[arg(long)]
    pub at: Option<String>,
    #[arg(long)]
    pub a_tube_factor: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub sample: SampleArgs,
    /// `default` or `delta:n,delta:n,…`.
    #[arg(long)]
    pub schedule: Option<String>,
    /// Steps of the default schedule.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Radius grid of the ball volumes at the pulled point.
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long)]
    pub rho_connect: Option<f64>,
    #[arg(long)]
    pub shell_width: Option<f64>,
    #[arg(long)]
    pub a_tube_factor: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = config::FileConfig::load(cli.config.as_deref())?;
    let out = config::pick(&cli.out, &file.out, PathBuf::from("out"));
    match &cli.command {
        Command::Tunnel(a) => commands::tunnel(a, &file, &out),
        Command::Sew(a) => commands::sew(a, &file, &out),
        Command::Pull(a) => commands::pull(a, &file, &out),
        Command::Converge(a) => commands::converge(a, &file, &out),
        Command::Probe(a) => commands::probe(a, &file, &out),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            let err = CliError::Validation(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            std::process::exit(err.exit_code());
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("{}", e.to_json());
        std::process::exit(e.exit_code());
    }
}
