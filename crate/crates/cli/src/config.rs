// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use wlab_core::protocol::{Accounting, Basis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Text,
}

impl FromStr for Format {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "text" => Ok(Format::Text),
            _ => bail!("unknown format {s:?} (csv or text)"),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Text => "text",
        })
    }
}

/// Effective parameters of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Fiber loss in dB/km.
    pub alpha: f64,
    pub eta_d: f64,
    /// Dark-count probability per detector slot.
    pub y0: f64,
    /// Sifting factor in the key rate.
    pub q: f64,
    /// Interferometer phase in radians.
    pub delta: f64,
    /// End-to-end distances in km.
    pub dmin: f64,
    pub dmax: f64,
    pub dstep: f64,
    /// End-to-end distance used when no explicit transmittance is given.
    pub distance: f64,
    /// Per-party transmittances; overrides the channel model when set.
    pub eta: Option<[f64; 4]>,
    pub trials: u64,
    pub seed: u64,
    pub mode: Accounting,
    pub basis: Basis,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: 0.2,
            eta_d: 0.145,
            y0: 6.02e-6,
            q: 1.0,
            delta: 0.0,
            dmin: 0.0,
            dmax: 300.0,
            dstep: 1.0,
            distance: 100.0,
            eta: None,
            trials: 1_000_000,
            seed: 0,
            mode: Accounting::Paper,
            basis: Basis::Z,
            out: None,
            format: Format::Csv,
        }
    }
}

fn float(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .trim()
        .parse()
        .with_context(|| format!("{key}: {v:?} is not a number"))?;
    if !x.is_finite() {
        bail!("{key}: {v:?} is not finite");
    }
    Ok(x)
}

/// Accepts plain integers and exact scientific forms such as `1e7`.
pub fn parse_count(v: &str) -> Result<u64> {
    if let Ok(n) = v.trim().parse::<u64>() {
        return Ok(n);
    }
    let x = float("count", v)?;
    if x < 0.0 || x.fract() != 0.0 || x > u64::MAX as f64 {
        bail!("{v:?} is not a non-negative integer");
    }
    Ok(x as u64)
}

/// One value for all four parties, or four comma-separated values.
pub fn parse_eta(v: &str) -> Result<[f64; 4]> {
    let parts: Vec<f64> = v
        .split(',')
        .map(|p| float("eta", p))
        .collect::<Result<_>>()?;
    match parts.as_slice() {
        [e] => Ok([*e; 4]),
        [a, b, c, d] => Ok([*a, *b, *c, *d]),
        _ => bail!("eta takes one value or four comma-separated values"),
    }
}

impl RunConfig {
    /// Sets one parameter from its textual form; keys match the long flag names.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim().replace('-', "_").as_str() {
            "alpha" => self.alpha = float(key, v)?,
            "eta_d" => self.eta_d = float(key, v)?,
            "y0" => self.y0 = float(key, v)?,
            "q" => self.q = float(key, v)?,
            "delta" => self.delta = float(key, v)?,
            "dmin" => self.dmin = float(key, v)?,
            "dmax" => self.dmax = float(key, v)?,
            "dstep" => self.dstep = float(key, v)?,
            "distance" => self.distance = float(key, v)?,
            "eta" => self.eta = Some(parse_eta(v)?),
            "trials" => self.trials = parse_count(v)?,
            "seed" => self.seed = parse_count(v)?,
            "mode" => self.mode = v.parse().map_err(|e| anyhow!("{e}"))?,
            "basis" => self.basis = v.parse().map_err(|e| anyhow!("{e}"))?,
            "out" => self.out = Some(PathBuf::from(v)),
            "format" => self.format = v.parse()?,
            other => bail!("unknown configuration key {other:?}"),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file; blank lines and `#` comments are skipped.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected key=value", path.display(), n + 1))?;
            self.set(k, v)
                .with_context(|| format!("{}:{}", path.display(), n + 1))?;
        }
        Ok(())
    }

    pub fn transmittances(&self) -> [f64; 4] {
        use wlab_core::keyrate::{transmittance, ChannelParams};
        self.eta.unwrap_or_else(|| {
            let ch = ChannelParams {
                alpha: self.alpha,
                arm_length_km: 0.0,
                eta_d: self.eta_d,
            };
            [transmittance(&ch.at_end_to_end(self.distance)); 4]
        })
    }

    /// `# key=value` provenance lines for the given keys.
    pub fn echo(&self, command: &str, keys: &[&str]) -> String {
        let mut out = format!("# wlab {command}\n");
        for k in keys {
            let v = match *k {
                "alpha" => self.alpha.to_string(),
                "eta_d" => self.eta_d.to_string(),
                "y0" => self.y0.to_string(),
                "q" => self.q.to_string(),
                "delta" => self.delta.to_string(),
                "dmin" => self.dmin.to_string(),
                "dmax" => self.dmax.to_string(),
                "dstep" => self.dstep.to_string(),
                "distance" => self.distance.to_string(),
                "eta" => {
                    let e = self.transmittances();
                    format!("{},{},{},{}", e[0], e[1], e[2], e[3])
                }
                "trials" => self.trials.to_string(),
                "seed" => self.seed.to_string(),
                "mode" => self.mode.to_string(),
                "basis" => self.basis.to_string(),
                "format" => self.format.to_string(),
                _ => continue,
            };
            out.push_str(&format!("# {k}={v}\n"));
        }
        out
    }
}
