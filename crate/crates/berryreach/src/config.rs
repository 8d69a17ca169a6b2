//! Suite configuration files.
//!
//! A suite file is TOML:
//!
//! ```toml
//! schema_version = 1
//! include = ["common.toml"]     # optional, resolved relative to this file
//! master_seed = 2024
//! trials = 40
//!
//! [overrides]                   # applied to every scenario
//! pipeline.servo.max_ticks = 2400
//!
//! [[scenario]]
//! kind = "corrupted_depth"
//! trials = 200                  # optional, defaults to the top-level value
//! [scenario.overrides]          # applied on top of this row's bundle
//! pipeline.depth_noise.sigma = 0.1
//! ```
//!
//! Included files are merged first, in order, and the including file is
//! merged over them: tables merge key by key, anything else is replaced.
//! Overrides are paths into the scenario's parameter bundle. An override
//! naming a key the bundle does not have is rejected, except inside a table
//! whose `kind` is being changed, which is replaced wholesale.

use std::collections::BTreeSet;
use std::path::Path;

use berryreach_core::harness::{ExperimentConfig, ScenarioKind, ScenarioParams};
use serde::Deserialize;
use serde_json::Value;

use crate::error::AppError;

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// The eight table rows at 40 trials each.
pub const BUNDLED_SUITE: &str = include_str!("../configs/table1.toml");

const MAX_INCLUDE_DEPTH: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub master_seed: u64,
    pub experiments: Vec<ExperimentConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSuite {
    schema_version: u32,
    master_seed: u64,
    trials: usize,
    #[serde(default)]
    overrides: toml::Table,
    #[serde(default)]
    scenario: Vec<RawScenario>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    kind: String,
    trials: Option<usize>,
    master_seed: Option<u64>,
    #[serde(default)]
    overrides: toml::Table,
}

pub fn scenario_from_name(name: &str) -> Result<ScenarioKind, AppError> {
    ScenarioKind::from_name(name).ok_or_else(|| {
        let valid: Vec<&str> = ScenarioKind::ALL.iter().map(|k| k.name()).collect();
        AppError::config(format!("unknown scenario '{name}'; valid names: {}", valid.join(", ")))
    })
}

/// Reads a suite file, following includes.
pub fn load_suite(path: &Path) -> Result<SuiteConfig, AppError> {
    let table = load_table(path, 0)?;
    suite_from_table(table)
}

pub fn parse_suite(text: &str) -> Result<SuiteConfig, AppError> {
    let table: toml::Table = text.parse().map_err(|e| AppError::config(format!("{e}")))?;
    if table.contains_key("include") {
        return Err(AppError::config("include needs a file path to resolve against"));
    }
    suite_from_table(table)
}

pub fn bundled_suite() -> SuiteConfig {
    parse_suite(BUNDLED_SUITE).expect("bundled suite parses")
}

fn load_table(path: &Path, depth: usize) -> Result<toml::Table, AppError> {
    if depth > MAX_INCLUDE_DEPTH {
        return Err(AppError::config(format!("{}: includes nested too deeply", path.display())));
    }
    let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    let mut table: toml::Table = text
        .parse()
        .map_err(|e| AppError::config(format!("{}: {e}", path.display())))?;
    let includes = match table.remove("include") {
        None => Vec::new(),
        Some(toml::Value::Array(items)) => items
            .into_iter()
            .map(|v| match v {
                toml::Value::String(s) => Ok(s),
                _ => Err(AppError::config(format!("{}: include entries must be strings", path.display()))),
            })
            .collect::<Result<_, _>>()?,
        Some(_) => return Err(AppError::config(format!("{}: include must be an array", path.display()))),
    };
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut merged = toml::Table::new();
    for inc in includes {
        let base = load_table(&dir.join(inc), depth + 1)?;
        merge_toml(&mut merged, base);
    }
    merge_toml(&mut merged, table);
    Ok(merged)
}

fn merge_toml(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge_toml(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn suite_from_table(table: toml::Table) -> Result<SuiteConfig, AppError> {
    let raw: RawSuite = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| AppError::config(e.to_string()))?;
    if raw.schema_version != CONFIG_SCHEMA_VERSION {
        return Err(AppError::config(format!(
            "schema_version {} not supported (expected {CONFIG_SCHEMA_VERSION})",
            raw.schema_version
        )));
    }
    if raw.scenario.is_empty() {
        return Err(AppError::config("suite lists no scenarios"));
    }
    let mut seen = BTreeSet::new();
    let mut experiments = Vec::new();
    for s in &raw.scenario {
        let kind = scenario_from_name(&s.kind)?;
        if !seen.insert(kind) {
            return Err(AppError::config(format!("scenario '{}' listed twice", s.kind)));
        }
        let mut params = to_json(&ScenarioParams::bundle(kind))?;
        apply_overrides(&mut params, &raw.overrides, "overrides")?;
        apply_overrides(&mut params, &s.overrides, &format!("{}.overrides", s.kind))?;
        let params: ScenarioParams = serde_json::from_value(params)
            .map_err(|e| AppError::config(format!("{}: {e}", s.kind)))?;
        let exp = ExperimentConfig {
            scenario: kind,
            trials: s.trials.unwrap_or(raw.trials),
            master_seed: s.master_seed.unwrap_or(raw.master_seed),
            params,
        };
        exp.validate().map_err(|e| AppError::config(format!("{}: {e}", s.kind)))?;
        experiments.push(exp);
    }
    Ok(SuiteConfig {
        master_seed: raw.master_seed,
        experiments,
    })
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<Value, AppError> {
    serde_json::to_value(v).map_err(|e| AppError::config(e.to_string()))
}

fn apply_overrides(params: &mut Value, overrides: &toml::Table, at: &str) -> Result<(), AppError> {
    let over = to_json(overrides)?;
    merge_checked(params, over, at)
}

fn merge_checked(base: &mut Value, over: Value, at: &str) -> Result<(), AppError> {
    let (Value::Object(b), Value::Object(o)) = (&mut *base, &over) else {
        *base = over;
        return Ok(());
    };
    // A new `kind` selects a different variant, so the old fields no longer apply.
    if let (Some(old), Some(new)) = (b.get("kind"), o.get("kind")) {
        if old != new {
            *base = over;
            return Ok(());
        }
    }
    let Value::Object(o) = over else { unreachable!() };
    for (k, v) in o {
        let path = format!("{at}.{k}");
        match b.get_mut(&k) {
            None => return Err(AppError::config(format!("unknown parameter {path}"))),
            Some(slot) => merge_checked(slot, v, &path)?,
        }
    }
    Ok(())
}
