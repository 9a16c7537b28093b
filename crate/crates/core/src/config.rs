//! Flat key=value config files with `[section]` headers. Unknown keys are
//! errors (no silent defaults for misspellings); the raw text is preserved
//! so reports can echo it bit-for-bit.
//!
//! ```text
//! [experiment]
//! id = max_tent_1d
//! driver = max
//! u0 = tent
//! dim = 1
//! epsilons = 0.125, 0.0625, 0.03125
//! oracle = hopf_lax
//! ```

use crate::error::{GrowthError, Result};
use crate::harness::{ExperimentConfig, OracleKind};
use std::collections::BTreeMap;

pub type Section = BTreeMap<String, String>;

#[derive(Clone, Debug)]
pub struct ConfigFile {
    pub raw: String,
    pub sections: BTreeMap<String, Section>,
}

pub fn parse(text: &str) -> Result<ConfigFile> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim().to_string();
            if sections.contains_key(&name) {
                return Err(GrowthError::Config(format!(
                    "line {}: duplicate section [{name}]",
                    lineno + 1
                )));
            }
            sections.insert(name.clone(), Section::new());
            current = Some(name);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(GrowthError::Config(format!(
                "line {}: expected key = value, got {line:?}",
                lineno + 1
            )));
        };
        let Some(section) = &current else {
            return Err(GrowthError::Config(format!(
                "line {}: key {:?} appears before any [section]",
                lineno + 1,
                key.trim()
            )));
        };
        let key = key.trim().to_string();
        let entry = sections.get_mut(section).unwrap();
        if entry.contains_key(&key) {
            return Err(GrowthError::Config(format!(
                "line {}: duplicate key {key:?} in [{section}]",
                lineno + 1
            )));
        }
        entry.insert(key, value.trim().to_string());
    }
    Ok(ConfigFile { raw: text.to_string(), sections })
}

fn parse_scalar<T: std::str::FromStr>(section: &str, key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| {
        GrowthError::Config(format!("[{section}] {key} = {value:?} is not a valid value"))
    })
}

fn parse_list(section: &str, key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(|s| parse_scalar(section, key, s.trim()))
        .collect()
}

/// `lo,hi` (applied to every axis) or `lo,hi; lo,hi; ...` (one per axis).
fn parse_window(section: &str, value: &str, dim: usize) -> Result<Vec<(f64, f64)>> {
    let pairs: Vec<Vec<f64>> = value
        .split(';')
        .map(|chunk| parse_list(section, "window", chunk.trim()))
        .collect::<Result<_>>()?;
    let as_pair = |v: &Vec<f64>| -> Result<(f64, f64)> {
        if v.len() != 2 {
            return Err(GrowthError::Config(format!(
                "[{section}] window: each axis needs exactly lo,hi, got {v:?}"
            )));
        }
        Ok((v[0], v[1]))
    };
    if pairs.len() == 1 {
        let p = as_pair(&pairs[0])?;
        Ok(vec![p; dim])
    } else if pairs.len() == dim {
        pairs.iter().map(as_pair).collect()
    } else {
        Err(GrowthError::Config(format!(
            "[{section}] window: {} axis pairs for dim = {dim}",
            pairs.len()
        )))
    }
}

const EXPERIMENT_KEYS: &[&str] = &[
    "id", "driver", "k", "delta", "well_a", "u0", "dim", "window", "horizon", "epsilons",
    "oracle", "nu", "samples_per_axis", "time_slices", "threshold", "fd_nodes",
];

/// Build an `ExperimentConfig` from the `[experiment]` section.
pub fn experiment_config(file: &ConfigFile) -> Result<ExperimentConfig> {
    let section = file
        .sections
        .get("experiment")
        .ok_or_else(|| GrowthError::Config("missing [experiment] section".into()))?;
    for key in section.keys() {
        if !EXPERIMENT_KEYS.contains(&key.as_str()) {
            return Err(GrowthError::Config(format!(
                "[experiment] unknown key {key:?}"
            )));
        }
    }
    let get = |key: &str| -> Result<&String> {
        section
            .get(key)
            .ok_or_else(|| GrowthError::Config(format!("[experiment] missing required key {key:?}")))
    };
    let s = "experiment";
    let dim: usize = parse_scalar(s, "dim", get("dim")?)?;
    let epsilons = parse_list(s, "epsilons", get("epsilons")?)?;
    let oracle = match get("oracle")?.as_str() {
        "hopf_lax" => OracleKind::HopfLax,
        "separable_heat" => {
            let nu = parse_scalar(s, "nu", get("nu")?)?;
            OracleKind::SeparableHeat { nu }
        }
        "fd_cross" => OracleKind::FdCross,
        "self_convergence" => OracleKind::SelfConvergence,
        other => {
            return Err(GrowthError::UnknownName { kind: "oracle", name: other.to_string() })
        }
    };
    if section.contains_key("nu") && !matches!(oracle, OracleKind::SeparableHeat { .. }) {
        return Err(GrowthError::Config(
            "[experiment] key \"nu\" only applies to oracle = separable_heat".into(),
        ));
    }
    let mut config = ExperimentConfig::new(
        get("id")?.clone(),
        get("driver")?.clone(),
        get("u0")?.clone(),
        dim,
        epsilons,
        oracle,
    );
    if let Some(v) = section.get("k") {
        config.k = Some(parse_scalar(s, "k", v)?);
    }
    if let Some(v) = section.get("delta") {
        config.delta = Some(parse_scalar(s, "delta", v)?);
    }
    if let Some(v) = section.get("well_a") {
        config.well_a = Some(parse_scalar(s, "well_a", v)?);
    }
    if let Some(v) = section.get("window") {
        config.window = parse_window(s, v, dim)?;
    } else {
        config.window = vec![(-2.0, 2.0); dim];
    }
    if let Some(v) = section.get("horizon") {
        config.horizon = parse_scalar(s, "horizon", v)?;
    }
    if let Some(v) = section.get("samples_per_axis") {
        config.samples_per_axis = parse_scalar(s, "samples_per_axis", v)?;
    }
    if let Some(v) = section.get("time_slices") {
        config.time_slices = parse_list(s, "time_slices", v)?;
    }
    if let Some(v) = section.get("threshold") {
        config.final_error_threshold = parse_scalar(s, "threshold", v)?;
    }
    if let Some(v) = section.get("fd_nodes") {
        config.fd_nodes = Some(parse_scalar(s, "fd_nodes", v)?);
    }
    config.validate()?;
    Ok(config)
}

/// Settings for the `consistency` subcommand's sweep matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencySettings {
    pub drivers: Vec<String>,
    pub dim: usize,
    pub functions: usize,
    pub seed: u64,
    pub epsilons: Vec<f64>,
}

const CONSISTENCY_KEYS: &[&str] = &["drivers", "dim", "functions", "seed", "epsilons"];

pub fn consistency_settings(file: &ConfigFile) -> Result<ConsistencySettings> {
    let section = file
        .sections
        .get("consistency")
        .ok_or_else(|| GrowthError::Config("missing [consistency] section".into()))?;
    for key in section.keys() {
        if !CONSISTENCY_KEYS.contains(&key.as_str()) {
            return Err(GrowthError::Config(format!(
                "[consistency] unknown key {key:?}"
            )));
        }
    }
    let s = "consistency";
    let drivers: Vec<String> = section
        .get("drivers")
        .map(|v| v.split(',').map(|x| x.trim().to_string()).collect())
        .unwrap_or_else(|| {
            ["power", "fractional", "median", "rsos", "smooth_kpz"]
                .iter()
                .map(|x| x.to_string())
                .collect()
        });
    Ok(ConsistencySettings {
        drivers,
        dim: match section.get("dim") {
            Some(v) => parse_scalar(s, "dim", v)?,
            None => 2,
        },
        functions: match section.get("functions") {
            Some(v) => parse_scalar(s, "functions", v)?,
            None => 20,
        },
        seed: match section.get("seed") {
            Some(v) => parse_scalar(s, "seed", v)?,
            None => 0,
        },
        epsilons: match section.get("epsilons") {
            Some(v) => parse_list(s, "epsilons", v)?,
            None => vec![1e-2, 1e-4, 1e-6],
        },
    })
}
