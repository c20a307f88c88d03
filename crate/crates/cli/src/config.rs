//! Flat `key = value` configuration files with dotted section names.
//!
//! ```text
//! # comment
//! params.n = 3
//! params.p = 2
//! family.kind = StrongSingular
//! ```

use std::path::Path;

use crate::args::Options;
use crate::error::CliError;

pub const KEYS: &[&str] = &[
    "params.n",
    "params.p",
    "params.q",
    "family.kind",
    "family.k",
    "family.M",
    "family.eps",
    "geometry.R",
    "curvature.B",
    "curvature.Btilde",
    "grid.lo",
    "grid.hi",
    "grid.per_decade",
    "window.lo",
    "window.hi",
    "classify.tol",
    "output.path",
    "seed",
];

pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("config line {}: expected `key = value`", idx + 1)))?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(CliError::Input(format!("config line {}: unknown key `{key}`", idx + 1)));
        }
        if out.iter().any(|(k, _)| k == key) {
            return Err(CliError::Input(format!("config line {}: duplicate key `{key}`", idx + 1)));
        }
        out.push((key.to_string(), value.to_string()));
    }
    Ok(out)
}

fn value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::Input(format!("config key `{key}`: cannot parse `{v}`")))
}

/// Fills the options not given on the command line from `path`.
pub fn merge_file(opts: &mut Options, path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
    merge(opts, &parse(&text)?)
}

pub fn merge(opts: &mut Options, entries: &[(String, String)]) -> Result<(), CliError> {
    fn fill<T: std::str::FromStr>(slot: &mut Option<T>, key: &str, v: &str) -> Result<(), CliError> {
        if slot.is_none() {
            *slot = Some(value(key, v)?);
        }
        Ok(())
    }
    for (key, v) in entries {
        let k = key.as_str();
        match k {
            "params.n" => fill(&mut opts.n, k, v)?,
            "params.p" => fill(&mut opts.p, k, v)?,
            "params.q" => fill(&mut opts.q, k, v)?,
            "family.kind" => fill(&mut opts.family, k, v)?,
            "family.k" => fill(&mut opts.k, k, v)?,
            "family.M" => fill(&mut opts.m, k, v)?,
            "family.eps" => fill(&mut opts.eps, k, v)?,
            "geometry.R" => fill(&mut opts.radius, k, v)?,
            "curvature.B" => fill(&mut opts.b, k, v)?,
            "curvature.Btilde" => fill(&mut opts.b_tilde, k, v)?,
            "grid.lo" => fill(&mut opts.grid_lo, k, v)?,
            "grid.hi" => fill(&mut opts.grid_hi, k, v)?,
            "grid.per_decade" => fill(&mut opts.grid_per_decade, k, v)?,
            "window.lo" => fill(&mut opts.window_lo, k, v)?,
            "window.hi" => fill(&mut opts.window_hi, k, v)?,
            "classify.tol" => fill(&mut opts.tol, k, v)?,
            "output.path" => fill(&mut opts.out, k, v)?,
            // Reserved: every pipeline is deterministic.
            "seed" => {
                value::<u64>(k, v)?;
            }
            _ => unreachable!("keys are validated by parse"),
        }
    }
    Ok(())
}
