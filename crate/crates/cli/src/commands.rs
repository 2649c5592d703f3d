use std::path::Path;

use serde::Serialize;
use serde_json::json;
use sewn_core::convergence::{
    mm_convergence_table, pull_geodesic, ExperimentConfig, DEFAULT_A_TUBE_FACTOR,
    DEFAULT_CURVE_NODES,
};
use sewn_core::metric::io::{read_space_with_hash, write_space};
use sewn_core::metric::{
    sample_sphere3_with_curve, scalar_probe, scalar_probe_mean, sphere3_volume, tags,
    FiniteMetricSpace,
};
use sewn_core::revolution::{build_curve, tunnel_summary, TunnelOptions, TunnelSurface};
use sewn_core::sewing::{
    build_sewn, place_balls, sewn_volume_report, SewingOptions, DEFAULT_RHO_CONNECT,
};
use sewn_core::tunnel::{verify_bend_condition, CurvatureProfile, DEFAULT_ALPHA_BEND};

use crate::config::{parse_radii, parse_schedule, pick, pick_opt, FileConfig, Format};
use crate::error::CliError;
use crate::output::{checks_json, finish, Run};
use crate::{ConvergeArgs, ProbeArgs, PullArgs, SampleArgs, SewArgs, TunnelArgs};

const DEFAULT_SEED: u64 = 7;
const DEFAULT_EPSILON: f64 = 0.05;
/// Relative tolerance of the mass bookkeeping after pulling.
const MASS_RTOL: f64 = 1e-12;
/// Triangle-inequality tolerance relative to the diameter.
const METRIC_RTOL: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
struct SampleConfig {
    #[serde(rename = "K")]
    k: f64,
    #[serde(rename = "N")]
    points: usize,
    seed: u64,
    curve_nodes: usize,
}

impl SampleConfig {
    fn resolve(a: &SampleArgs, f: &FileConfig, default_points: usize) -> Self {
        SampleConfig {
            k: pick(&a.k, &f.k, 1.0),
            points: pick(&a.points, &f.points, default_points),
            seed: pick(&a.seed, &f.seed, DEFAULT_SEED),
            curve_nodes: pick(&a.curve_nodes, &f.curve_nodes, DEFAULT_CURVE_NODES),
        }
    }

    fn draw(&self) -> Result<FiniteMetricSpace, CliError> {
        Ok(sample_sphere3_with_curve(self.points, self.k, self.seed, self.curve_nodes)?)
    }

    fn a_tube(&self, factor: f64) -> f64 {
        ExperimentConfig {
            ambient_curvature: self.k,
            curve_nodes: self.curve_nodes,
            a_tube_factor: factor,
            ..ExperimentConfig::default()
        }
        .a_tube()
    }
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Validation(format!("{name} must be positive, got {v}")))
    }
}

#[derive(Serialize)]
struct TunnelConfig {
    #[serde(rename = "K")]
    k: f64,
    delta0: f64,
    alpha_bend: f64,
    smooth_width: Option<f64>,
    step: Option<f64>,
    tail_length: Option<f64>,
    delta: f64,
    epsilon: f64,
}

#[derive(Serialize)]
struct ProfileFile<'a> {
    smooth: bool,
    profile: &'a CurvatureProfile,
}

pub fn tunnel(a: &TunnelArgs, f: &FileConfig, out: &Path) -> Result<(), CliError> {
    let delta0 = pick(&a.delta0, &f.delta0, 0.01);
    let cfg = TunnelConfig {
        k: pick(&a.k, &f.k, 1.0),
        delta0,
        alpha_bend: pick(&a.alpha_bend, &f.alpha_bend, DEFAULT_ALPHA_BEND),
        smooth_width: pick_opt(&a.smooth_width, &f.smooth_width),
        step: pick_opt(&a.step, &f.step),
        tail_length: pick_opt(&a.tail_length, &f.tail_length),
        delta: pick(&a.delta, &f.delta, 10.0 * delta0),
        epsilon: pick(&a.epsilon, &f.epsilon, DEFAULT_EPSILON),
    };
    let opts = TunnelOptions {
        alpha_bend: cfg.alpha_bend,
        smooth_width: cfg.smooth_width,
        step: cfg.step,
        tail_length: cfg.tail_length,
    };
    let (profile, _) = build_curve(cfg.k, cfg.delta0, &opts)?;
    let surface = TunnelSurface::build(cfg.k, cfg.delta, cfg.delta0, opts)?;
    let curve = &surface.curve;
    let bend = verify_bend_condition(curve);
    let shape = curve.shape_report();
    let min_scal = surface.min_scalar_curvature();
    let geometry = if min_scal > 0.0 {
        Some(tunnel_summary(&surface, cfg.epsilon)?)
    } else {
        None
    };

    let run = Run::new("tunnel", &cfg, out)?;
    run.write_csv("curve.csv", &curve.to_csv())?;
    run.write_json(
        "profile.json",
        ProfileFile {
            smooth: profile.is_smooth(),
            profile: &profile,
        },
    )?;
    let checks = [
        ("min_scal_positive", min_scal > 0.0),
        ("bend_margin_positive", bend.holds()),
    ];
    run.write_json(
        "summary.json",
        json!({
            "smooth": profile.is_smooth(),
            "length": curve.length,
            "min_scal": min_scal,
            "min_x1": curve.min_x1(),
            "bend_margin": bend.min_margin,
            "bend_argmin": bend.argmin,
            "contraction": profile.recursion.contraction,
            "steps": profile.recursion.steps,
            "shape": shape,
            "geometry": geometry,
            "checks": checks_json(&checks),
        }),
    )?;
    finish(&checks)
}

#[derive(Serialize)]
struct SewConfig {
    #[serde(flatten)]
    sample: SampleConfig,
    n: usize,
    delta: f64,
    shell_width: Option<f64>,
    rho_connect: f64,
    epsilon: f64,
    format: Format,
}

pub fn sew(a: &SewArgs, f: &FileConfig, out: &Path) -> Result<(), CliError> {
    let cfg = SewConfig {
        sample: SampleConfig::resolve(&a.sample, f, 8000),
        n: pick(&a.n, &f.n, 3),
        delta: pick(&a.delta, &f.delta, 0.2),
        shell_width: pick_opt(&a.shell_width, &f.shell_width),
        rho_connect: pick(&a.rho_connect, &f.rho_connect, DEFAULT_RHO_CONNECT),
        epsilon: pick(&a.epsilon, &f.epsilon, DEFAULT_EPSILON),
        format: Format::parse(&pick(&a.format, &f.format, "bin".into()))?,
    };
    let x = cfg.sample.draw()?;
    let opts = SewingOptions {
        shell_width: cfg.shell_width,
        tunnel: TunnelOptions::default(),
    };
    let plan = place_balls(&x, cfg.n, cfg.delta, &opts)?;
    let s = build_sewn(&x, &plan, cfg.rho_connect)?;
    let vol = sewn_volume_report(&s, cfg.epsilon);
    let diam = s.edited_diameter();

    let run = Run::new("sew", &cfg, out)?;
    run.write_json("plan.json", &plan)?;
    write_space(
        &run.path(&format!("sewn.{}", cfg.format.extension())),
        &s.space,
        Some(&run.hash),
    )?;
    let checks = [("diameter_bound", diam <= plan.diam_bound), ("volume_bound", vol.ok)];
    run.write_json(
        "summary.json",
        json!({
            "diam_edited": diam,
            "H_delta": plan.diam_bound,
            "sewn_points": s.n(),
            "edited_points": s.edited_idx.len(),
            "shell_sizes": s.shells.iter().map(Vec::len).collect::<Vec<_>>(),
            "edge_count": s.edge_count,
            "base_index": s.base_index,
            "volume": vol,
            "fidelity": s.fidelity,
            "checks": checks_json(&checks),
        }),
    )?;
    finish(&checks)
}

#[derive(Serialize)]
struct PullConfig {
    #[serde(flatten)]
    sample: SampleConfig,
    k_set: String,
    a_tube_factor: f64,
    format: Format,
}

pub fn pull(a: &PullArgs, f: &FileConfig, out: &Path) -> Result<(), CliError> {
    let cfg = PullConfig {
        sample: SampleConfig::resolve(&a.sample, f, 20000),
        k_set: pick(&a.k_set, &f.k_set, "geodesic".into()),
        a_tube_factor: positive(
            "a_tube_factor",
            pick(&a.a_tube_factor, &f.a_tube_factor, DEFAULT_A_TUBE_FACTOR),
        )?,
        format: Format::parse(&pick(&a.format, &f.format, "bin".into()))?,
    };
    if cfg.k_set != "geodesic" {
        return Err(CliError::Validation(format!(
            "K-set `{}` is not supported; use `geodesic`",
            cfg.k_set
        )));
    }
    let x = cfg.sample.draw()?;
    let a_tube = cfg.sample.a_tube(cfg.a_tube_factor);
    let y = pull_geodesic(&x, a_tube)?;
    let removed: f64 = y.pulled.iter().map(|&i| x.weight[i]).sum();
    let expected = x.total_weight() - removed;
    let mass = y.space.total_weight();
    let metric = y.space.check_metric(METRIC_RTOL, cfg.sample.seed);

    let run = Run::new("pull", &cfg, out)?;
    write_space(
        &run.path(&format!("pulled.{}", cfg.format.extension())),
        &y.space,
        Some(&run.hash),
    )?;
    let checks = [
        ("metric_axioms", metric.ok()),
        ("mass_bookkeeping", (mass - expected).abs() <= MASS_RTOL * expected.abs()),
    ];
    run.write_json(
        "summary.json",
        json!({
            "p0": y.p0,
            "pulled_count": y.pulled.len(),
            "points": y.space.n(),
            "a_tube": a_tube,
            "mass_base": x.total_weight(),
            "mass_removed": removed,
            "mass": mass,
            "metric_check": metric,
            "checks": checks_json(&checks),
        }),
    )?;
    finish(&checks)
}

#[derive(Serialize)]
struct ProbeConfig {
    #[serde(flatten)]
    sample: SampleConfig,
    space: String,
    r: String,
    at: String,
    a_tube_factor: f64,
    /// Config hash stored in a loaded container.
    source_hash: Option<String>,
}

pub fn probe(a: &ProbeArgs, f: &FileConfig, out: &Path) -> Result<(), CliError> {
    let sample = SampleConfig::resolve(&a.sample, f, 20000);
    let space = pick(&a.space, &f.space, "sphere".into());
    let at_default = if space == "pulled" { "p0" } else { "all" };
    let r = pick(&a.r, &f.r, "0.3:0.6:0.05".into());
    let radii = parse_radii(&r)?;
    let a_tube_factor = positive(
        "a_tube_factor",
        pick(&a.a_tube_factor, &f.a_tube_factor, DEFAULT_A_TUBE_FACTOR),
    )?;
    let (x, source_hash) = match space.as_str() {
        "sphere" => (sample.draw()?, None),
        "pulled" => (pull_geodesic(&sample.draw()?, sample.a_tube(a_tube_factor))?.space, None),
        path => read_space_with_hash(Path::new(path))?,
    };
    let cfg = ProbeConfig {
        sample,
        space,
        r,
        at: pick(&a.at, &f.at, at_default.into()),
        a_tube_factor,
        source_hash,
    };
    let report = match cfg.at.as_str() {
        "all" => {
            let all: Vec<usize> = (0..x.n()).collect();
            scalar_probe_mean(&x, &all, &radii)?
        }
        "p0" => {
            let p0 = x.labels.iter().position(|&l| l == tags::PULLED).ok_or_else(|| {
                CliError::Validation("space has no pulled point; use --at all or an index".into())
            })?;
            scalar_probe(&x, p0, &radii)?
        }
        idx => {
            let p: usize = idx.parse().map_err(|_| {
                CliError::Validation(format!("--at must be all, p0 or an index, got `{idx}`"))
            })?;
            scalar_probe(&x, p, &radii)?
        }
    };
    let run = Run::new("probe", &cfg, out)?;
    run.write_csv("probe.csv", &report.to_csv())?;
    run.write_json("summary.json", json!({ "points": x.n(), "report": report }))?;
    Ok(())
}

#[derive(Serialize)]
struct ConvergeConfig {
    experiment: ExperimentConfig,
    schedule: Vec<(f64, usize)>,
    r_grid: Vec<f64>,
}

pub fn converge(a: &ConvergeArgs, f: &FileConfig, out: &Path) -> Result<(), CliError> {
    let sample = SampleConfig::resolve(&a.sample, f, 8000);
    let steps = pick(&a.steps, &f.steps, 5);
    let schedule = parse_schedule(&pick(&a.schedule, &f.schedule, "default".into()), steps)?;
    let r_grid = parse_radii(&pick(&a.r, &f.r, "0.2:0.6:0.1".into()))?;
    let experiment = ExperimentConfig {
        points: sample.points,
        seed: sample.seed,
        ambient_curvature: sample.k,
        curve_nodes: sample.curve_nodes,
        a_tube_factor: positive(
            "a_tube_factor",
            pick(&a.a_tube_factor, &f.a_tube_factor, DEFAULT_A_TUBE_FACTOR),
        )?,
        rho_connect: pick(&a.rho_connect, &f.rho_connect, DEFAULT_RHO_CONNECT),
        epsilon: pick(&a.epsilon, &f.epsilon, DEFAULT_EPSILON),
        sewing: SewingOptions {
            shell_width: pick_opt(&a.shell_width, &f.shell_width),
            tunnel: TunnelOptions::default(),
        },
    };
    let cfg = ConvergeConfig {
        experiment,
        schedule,
        r_grid,
    };
    let report = mm_convergence_table(&cfg.experiment, &cfg.schedule, &cfg.r_grid)?;
    let run = Run::new("converge", &cfg, out)?;
    run.write_csv("convergence.csv", &report.to_csv())?;
    for j in 0..report.steps.len() {
        run.write_csv(&format!("ball_{j}.csv"), &report.ball_csv(j))?;
    }
    let vol = sphere3_volume(cfg.experiment.ambient_curvature);
    let eps = cfg.experiment.epsilon;
    let checks = [
        (
            "distortion_decreasing",
            report.steps.windows(2).all(|w| w[1].distortion < w[0].distortion),
        ),
        (
            "mass_within_epsilon",
            report.steps.iter().all(|s| (s.mass - vol).abs() <= eps * vol),
        ),
    ];
    run.write_json(
        "summary.json",
        json!({ "report": report, "checks": checks_json(&checks) }),
    )?;
    finish(&checks)
}
