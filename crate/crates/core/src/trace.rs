//! Raw trace files: little-endian `f64` samples plus a JSON sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrator::{Diagnostics, RunConfig};
use crate::noise::NoiseStreams;
use crate::series::TimeSeries;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    /// Sample spacing of the stored record (s).
    pub dt: f64,
    pub samples: usize,
    pub config_hash: String,
    pub sim_seed: u64,
    pub noise_seed: u64,
    pub config: RunConfig,
    pub diagnostics: Diagnostics,
}

/// Sidecar path: `<trace>.json`.
pub fn meta_path(trace: &Path) -> PathBuf {
    let mut s = trace.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn encode(samples: &[f64]) -> Vec<u8> {
    samples.iter().flat_map(|v| v.to_le_bytes()).collect()
}

pub fn decode(bytes: &[u8]) -> Result<Vec<f64>> {
    if !bytes.len().is_multiple_of(8) {
        return Err(Error::InvalidInput(format!(
            "trace length {} is not a multiple of 8 bytes",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub fn write_trace(path: &Path, series: &TimeSeries, meta: &TraceMeta) -> Result<()> {
    fs::write(path, encode(&series.samples))?;
    fs::write(meta_path(path), serde_json::to_vec_pretty(meta)?)?;
    Ok(())
}

/// Read samples; the sidecar is optional and `dt` overrides it when given.
pub fn read_trace(path: &Path, dt: Option<f64>) -> Result<(TimeSeries, Option<TraceMeta>)> {
    let samples = decode(&fs::read(path)?)?;
    let mp = meta_path(path);
    let meta: Option<TraceMeta> = if mp.exists() {
        Some(serde_json::from_slice(&fs::read(mp)?)?)
    } else {
        None
    };
    let dt = match (dt, &meta) {
        (Some(dt), _) => dt,
        (None, Some(m)) => m.dt,
        (None, None) => {
            return Err(Error::InvalidInput(
                "no sample spacing given and no sidecar found".into(),
            ))
        }
    };
    Ok((TimeSeries::new(samples, dt)?, meta))
}

/// Dump the three forcing streams as `<prefix>.xi.f64` etc.
pub fn write_streams(prefix: &Path, streams: &NoiseStreams) -> Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for (tag, data) in [
        ("xi", &streams.xi),
        ("eta", &streams.eta),
        ("beta", &streams.beta),
    ] {
        let mut s = prefix.as_os_str().to_owned();
        s.push(format!(".{tag}.f64"));
        let p = PathBuf::from(s);
        fs::write(&p, encode(data))?;
        paths.push(p);
    }
    Ok(paths)
}
