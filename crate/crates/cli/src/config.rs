use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Keys accepted in a `--config` file. Flags given on the command line win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub delta0: Option<f64>,
    pub alpha_bend: Option<f64>,
    pub smooth_width: Option<f64>,
    pub step: Option<f64>,
    pub tail_length: Option<f64>,
    pub delta: Option<f64>,
    pub epsilon: Option<f64>,
    #[serde(rename = "N")]
    pub points: Option<usize>,
    pub seed: Option<u64>,
    pub curve_nodes: Option<usize>,
    pub n: Option<usize>,
    pub shell_width: Option<f64>,
    pub rho_connect: Option<f64>,
    pub a_tube_factor: Option<f64>,
    pub k_set: Option<String>,
    pub space: Option<String>,
    pub r: Option<String>,
    pub at: Option<String>,
    pub schedule: Option<String>,
    pub steps: Option<usize>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Validation(format!("config {}: {e}", path.display())))
    }
}

/// Flag value, else config value, else default.
pub fn pick<T: Clone>(flag: &Option<T>, file: &Option<T>, default: T) -> T {
    flag.clone().or_else(|| file.clone()).unwrap_or(default)
}

/// Flag value, else config value.
pub fn pick_opt<T: Clone>(flag: &Option<T>, file: &Option<T>) -> Option<T> {
    flag.clone().or_else(|| file.clone())
}

/// Space container format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Bin,
    Json,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "bin" => Ok(Format::Bin),
            "json" => Ok(Format::Json),
            other => Err(CliError::Validation(format!(
                "format must be `bin` or `json`, got `{other}`"
            ))),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Bin => "bin",
            Format::Json => "json",
        }
    }
}

/// Parses `a:b:step` into an inclusive radius grid, or a single radius.
pub fn parse_radii(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Validation(format!("bad number `{t}` in radius spec `{s}`")))
    };
    match parts.as_slice() {
        [r] => {
            let r = num(r)?;
            if !(r > 0.0 && r.is_finite()) {
                return Err(CliError::Validation(format!("radius {r} is not positive")));
            }
            Ok(vec![r])
        }
        [a, b, step] => Ok(sewn_core::metric::radius_grid(num(a)?, num(b)?, num(step)?)?),
        _ => Err(CliError::Validation(format!(
            "radius spec `{s}` is neither `r` nor `a:b:step`"
        ))),
    }
}

/// Parses `default` or a list `delta:n,delta:n,…`.
pub fn parse_schedule(s: &str, steps: usize) -> Result<Vec<(f64, usize)>, CliError> {
    if s == "default" {
        if steps == 0 {
            return Err(CliError::Validation("steps must be positive".into()));
        }
        return Ok(sewn_core::sewing::default_schedule(steps));
    }
    s.split(',')
        .map(|item| {
            let (d, n) = item.split_once(':').ok_or_else(|| {
                CliError::Validation(format!("schedule entry `{item}` is not `delta:n`"))
            })?;
            let d: f64 = d
                .trim()
                .parse()
                .map_err(|_| CliError::Validation(format!("bad delta `{d}` in schedule")))?;
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| CliError::Validation(format!("bad count `{n}` in schedule")))?;
            Ok((d, n))
        })
        .collect()
}
