//! TOML experiment files.
//!
//! ```toml
//! seed = 42
//! paths = 10000
//! steps_per_year = 252
//! horizons = [1, 2, 5, 10, 20, 50]
//! bridge_correction = false
//!
//! [params]
//! alpha = 0.16
//! r_f = 0.04
//! sigma = 0.2
//! s0 = 1.0
//!
//! [strategy]
//! kind = "long_det_barrier"
//! k = 0.05
//! ```
//!
//! `analytic` and `classify` only read `[params]` (and `[strategy]`), so the
//! simulation keys may be left out of files used for those commands.

use std::path::Path;

use serde::de::DeserializeOwned;
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::mc::ExperimentConfig;
use crate::model::ModelParams;
use crate::strategies::StrategySpec;

const PARAM_KEYS: [&str; 4] = ["alpha", "r_f", "sigma", "s0"];
const EXPERIMENT_KEYS: [&str; 4] = ["horizons", "paths", "steps_per_year", "seed"];

/// A parsed configuration file, checked section by section on demand.
#[derive(Clone, Debug)]
pub struct ConfigFile {
    table: Table,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("config", e.message().to_string()))?;
        Ok(Self { table })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn params(&self) -> Result<ModelParams> {
        let section = self
            .table
            .get("params")
            .and_then(Value::as_table)
            .ok_or_else(|| Error::config("params", "missing [params] section"))?;
        for key in PARAM_KEYS {
            if !section.contains_key(key) {
                return Err(Error::config(key, "missing from [params]"));
            }
        }
        let num = |key: &str| -> Result<f64> {
            match &section[key] {
                Value::Float(x) => Ok(*x),
                Value::Integer(i) => Ok(*i as f64),
                other => Err(Error::config(key, format!("expected a number, got {}", other.type_str()))),
            }
        };
        if let Some(extra) = section.keys().find(|k| !PARAM_KEYS.contains(&k.as_str())) {
            return Err(Error::config(extra.as_str(), "unknown key in [params]"));
        }
        ModelParams::new(num("alpha")?, num("r_f")?, num("sigma")?, num("s0")?)
    }

    pub fn strategy(&self) -> Result<StrategySpec> {
        let section = self
            .table
            .get("strategy")
            .ok_or_else(|| Error::config("strategy", "missing [strategy] section"))?;
        convert("strategy", section.clone())
    }

    pub fn has_strategy(&self) -> bool {
        self.table.contains_key("strategy")
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        for key in EXPERIMENT_KEYS {
            if !self.table.contains_key(key) {
                return Err(Error::config(key, "missing"));
            }
        }
        let params = self.params()?;
        let strategy = self.strategy()?;
        let horizons: Vec<f64> = convert("horizons", self.table["horizons"].clone())?;
        let paths: usize = convert("paths", self.table["paths"].clone())?;
        let steps_per_year: u32 = convert("steps_per_year", self.table["steps_per_year"].clone())?;
        let seed: u64 = convert("seed", self.table["seed"].clone())?;
        let bridge_correction = match self.table.get("bridge_correction") {
            Some(v) => convert("bridge_correction", v.clone())?,
            None => false,
        };
        let known = ["params", "strategy", "bridge_correction"];
        if let Some(extra) = self
            .table
            .keys()
            .find(|k| !EXPERIMENT_KEYS.contains(&k.as_str()) && !known.contains(&k.as_str()))
        {
            return Err(Error::config(extra.as_str(), "unknown key"));
        }
        let config = ExperimentConfig {
            params,
            strategy,
            horizons,
            paths,
            steps_per_year,
            seed,
            bridge_correction,
        };
        config.validate()?;
        Ok(config)
    }
}

fn convert<T: DeserializeOwned>(field: &str, value: Value) -> Result<T> {
    value
        .try_into()
        .map_err(|e: toml::de::Error| Error::config(field, e.message().to_string()))
}

/// Renders a config in the same layout [`ConfigFile::experiment`] reads.
pub fn experiment_to_toml(config: &ExperimentConfig) -> String {
    let mut table = Table::new();
    table.insert("seed".into(), Value::Integer(config.seed as i64));
    table.insert("paths".into(), Value::Integer(config.paths as i64));
    table.insert("steps_per_year".into(), Value::Integer(config.steps_per_year as i64));
    table.insert(
        "horizons".into(),
        Value::Array(config.horizons.iter().map(|&h| Value::Float(h)).collect()),
    );
    table.insert("bridge_correction".into(), Value::Boolean(config.bridge_correction));
    let p = &config.params;
    let mut params = Table::new();
    params.insert("alpha".into(), Value::Float(p.alpha()));
    params.insert("r_f".into(), Value::Float(p.r_f()));
    params.insert("sigma".into(), Value::Float(p.sigma()));
    params.insert("s0".into(), Value::Float(p.s0()));
    table.insert("params".into(), Value::Table(params));
    table.insert(
        "strategy".into(),
        Value::try_from(config.strategy).expect("strategy serializes to a table"),
    );
    toml::to_string(&table).expect("table serializes")
}
