//! Space container: little-endian binary or JSON, chosen by file extension.
//!
//! Binary layout: magic `SEWNFMS1`, `u64` point count `n`, `u8` coords flag,
//! `f64` sphere curvature (NaN when absent), `n·n` row-major `f64` distances,
//! `n` weights, optional `4n` coordinates, `n` `u32` labels, then a `u32`
//! length and that many UTF-8 bytes of config hash (length 0 when absent).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::matrix::DistanceMatrix;
use super::space::FiniteMetricSpace;
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"SEWNFMS1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonSpace {
    n: usize,
    dist: Vec<f64>,
    weight: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coords: Option<Vec<[f64; 4]>>,
    #[serde(default, skip_serializing_if = "Option::is_none", rename = "K")]
    sphere_curvature: Option<f64>,
    labels: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config_hash: Option<String>,
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Writes the space; `config_hash` is embedded in JSON containers.
pub fn write_space(path: &Path, x: &FiniteMetricSpace, config_hash: Option<&str>) -> Result<()> {
    let n = x.n();
    let mut w = BufWriter::new(File::create(path)?);
    if is_json(path) {
        let mut dist = Vec::with_capacity(n * n);
        let mut row = Vec::with_capacity(n);
        for i in 0..n {
            x.dist.row_into(i, &mut row);
            dist.extend_from_slice(&row);
        }
        let js = JsonSpace {
            n,
            dist,
            weight: x.weight.clone(),
            coords: x.coords.clone(),
            sphere_curvature: x.sphere_curvature,
            labels: x.labels.clone(),
            config_hash: config_hash.map(str::to_owned),
        };
        serde_json::to_writer(&mut w, &js)?;
        w.write_all(b"\n")?;
    } else {
        w.write_all(MAGIC)?;
        w.write_all(&(n as u64).to_le_bytes())?;
        w.write_all(&[u8::from(x.coords.is_some())])?;
        w.write_all(&x.sphere_curvature.unwrap_or(f64::NAN).to_le_bytes())?;
        let mut row = Vec::with_capacity(n);
        for i in 0..n {
            x.dist.row_into(i, &mut row);
            for v in &row {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        for v in &x.weight {
            w.write_all(&v.to_le_bytes())?;
        }
        if let Some(c) = &x.coords {
            for p in c {
                for v in p {
                    w.write_all(&v.to_le_bytes())?;
                }
            }
        }
        for l in &x.labels {
            w.write_all(&l.to_le_bytes())?;
        }
        let hash = config_hash.unwrap_or("").as_bytes();
        w.write_all(&(hash.len() as u32).to_le_bytes())?;
        w.write_all(hash)?;
    }
    w.flush()?;
    Ok(())
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn from_full(n: usize, full: &[f64]) -> Result<DistanceMatrix> {
    for i in 0..n {
        for j in i + 1..n {
            if full[i * n + j] != full[j * n + i] {
                return Err(Error::Construction(format!(
                    "distance matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(DistanceMatrix::from_fn(n, |i, j| full[i * n + j]))
}

pub fn read_space(path: &Path) -> Result<FiniteMetricSpace> {
    read_space_with_hash(path).map(|(x, _)| x)
}

/// Reads a space and the config hash stored with it.
pub fn read_space_with_hash(path: &Path) -> Result<(FiniteMetricSpace, Option<String>)> {
    let mut r = BufReader::new(File::open(path)?);
    if is_json(path) {
        let js: JsonSpace = serde_json::from_reader(r)?;
        if js.dist.len() != js.n * js.n || js.labels.len() != js.n {
            return Err(Error::Construction("container arrays do not match n".into()));
        }
        let mut x = FiniteMetricSpace::new(from_full(js.n, &js.dist)?, js.weight)?;
        x.coords = js.coords;
        x.sphere_curvature = js.sphere_curvature;
        x.labels = js.labels;
        return Ok((x, js.config_hash));
    }
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Construction("not a space container".into()));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let n = u64::from_le_bytes(b8) as usize;
    let mut flag = [0u8; 1];
    r.read_exact(&mut flag)?;
    let k = read_f64(&mut r)?;
    let mut full = vec![0.0; n * n];
    for v in full.iter_mut() {
        *v = read_f64(&mut r)?;
    }
    let weight = (0..n).map(|_| read_f64(&mut r)).collect::<Result<Vec<_>>>()?;
    let coords = if flag[0] == 1 {
        let mut c = Vec::with_capacity(n);
        for _ in 0..n {
            c.push([read_f64(&mut r)?, read_f64(&mut r)?, read_f64(&mut r)?, read_f64(&mut r)?]);
        }
        Some(c)
    } else {
        None
    };
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        labels.push(u32::from_le_bytes(b4));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let mut hash = vec![0u8; u32::from_le_bytes(b4) as usize];
    r.read_exact(&mut hash)?;
    let hash = String::from_utf8(hash)
        .map_err(|_| Error::Construction("config hash is not UTF-8".into()))?;
    let mut x = FiniteMetricSpace::new(from_full(n, &full)?, weight)?;
    x.coords = coords;
    x.sphere_curvature = if k.is_nan() { None } else { Some(k) };
    x.labels = labels;
    Ok((x, (!hash.is_empty()).then_some(hash)))
}
