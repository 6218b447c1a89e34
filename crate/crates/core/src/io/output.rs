//! CSV/JSON emission and run manifests.
//!
//! `estimates.csv` columns, in order:
//!
//! ```text
//! horizon,mean,se_mean,var,var_over_t,loss_prob,se_loss,analytic_mean,analytic_loss
//! ```
//!
//! Numbers carry 12 significant digits. Absent analytic values are empty
//! cells. `hist_T<h>.csv` holds `bin_center,count` for horizon `h`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mc::{AnalyticLimits, EstimateSeries, ExperimentConfig, HorizonEstimate};

pub const ESTIMATES_HEADER: &str =
    "horizon,mean,se_mean,var,var_over_t,loss_prob,se_loss,analytic_mean,analytic_loss";
pub const HISTOGRAM_HEADER: &str = "bin_center,count";
pub const ESTIMATES_FILE: &str = "estimates.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Rounds to 12 significant digits and prints the shortest form of the result.
pub fn format_number(x: f64) -> Result<String> {
    if !x.is_finite() {
        return Err(Error::domain(format!("refusing to emit non-finite value {x}")));
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let a = rounded.abs();
    Ok(if rounded != 0.0 && !(1e-5..1e15).contains(&a) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    })
}

fn cell(x: Option<f64>) -> Result<String> {
    x.map_or_else(|| Ok(String::new()), format_number)
}

pub fn estimates_csv(series: &EstimateSeries) -> Result<String> {
    let mut out = String::from(ESTIMATES_HEADER);
    out.push('\n');
    for r in &series.rows {
        let cells = [
            format_number(r.horizon)?,
            format_number(r.mean)?,
            format_number(r.se_mean)?,
            format_number(r.var)?,
            format_number(r.var_over_t)?,
            format_number(r.loss_prob)?,
            format_number(r.se_loss)?,
            cell(r.analytic_mean)?,
            cell(r.analytic_loss)?,
        ];
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Reads `estimates.csv` back. Columns not stored in the file come back empty.
pub fn parse_estimates_csv(text: &str, paths: usize, initial_max_abs: f64) -> Result<EstimateSeries> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == ESTIMATES_HEADER => {}
        Some(h) => return Err(Error::config("estimates", format!("unexpected header `{h}`"))),
        None => return Err(Error::config("estimates", "empty file")),
    }
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != 9 {
            return Err(Error::config("estimates", format!("row {} has {} cells, expected 9", n + 1, cells.len())));
        }
        let num = |i: usize| -> Result<f64> {
            cells[i]
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::config("estimates", format!("row {}: bad number `{}`", n + 1, cells[i])))
        };
        let opt = |i: usize| -> Result<Option<f64>> {
            if cells[i].is_empty() {
                Ok(None)
            } else {
                num(i).map(Some)
            }
        };
        rows.push(HorizonEstimate {
            horizon: num(0)?,
            mean: num(1)?,
            se_mean: num(2)?,
            var: num(3)?,
            se_var: None,
            var_over_t: num(4)?,
            loss_prob: num(5)?,
            se_loss: num(6)?,
            analytic_mean: opt(7)?,
            analytic_var: None,
            analytic_loss: opt(8)?,
            histogram: Vec::new(),
        });
    }
    Ok(EstimateSeries {
        paths,
        initial_max_abs,
        rows,
        limits: AnalyticLimits::default(),
    })
}

pub fn histogram_csv(row: &HorizonEstimate) -> Result<String> {
    let mut out = String::from(HISTOGRAM_HEADER);
    out.push('\n');
    for b in &row.histogram {
        writeln!(out, "{},{}", format_number(b.center)?, b.count).expect("write to string");
    }
    Ok(out)
}

pub fn histogram_file_name(horizon: f64) -> Result<String> {
    Ok(format!("hist_T{}.csv", format_number(horizon)?))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputChecksum {
    pub file: String,
    pub horizon: Option<f64>,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub wall_time_secs: f64,
    pub paths: usize,
    pub initial_value_max_abs: f64,
    pub limits: AnalyticLimits,
    pub outputs: Vec<OutputChecksum>,
}

impl RunManifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::config("manifest", e.to_string()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes estimates, per-horizon histograms and the manifest into `dir`.
pub fn write_run(
    dir: &Path,
    config: &ExperimentConfig,
    series: &EstimateSeries,
    wall_time_secs: f64,
) -> Result<RunManifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut outputs = Vec::new();

    let estimates = estimates_csv(series)?;
    write_file(&dir.join(ESTIMATES_FILE), &estimates)?;
    outputs.push(OutputChecksum {
        file: ESTIMATES_FILE.to_string(),
        horizon: None,
        sha256: sha256_hex(estimates.as_bytes()),
    });

    for row in &series.rows {
        let name = histogram_file_name(row.horizon)?;
        let body = histogram_csv(row)?;
        write_file(&dir.join(&name), &body)?;
        outputs.push(OutputChecksum {
            file: name,
            horizon: Some(row.horizon),
            sha256: sha256_hex(body.as_bytes()),
        });
    }

    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        seed: config.seed,
        wall_time_secs,
        paths: series.paths,
        initial_value_max_abs: series.initial_max_abs,
        limits: series.limits.clone(),
        outputs,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&dir.join(MANIFEST_FILE), &(json + "\n"))?;
    Ok(manifest)
}

/// Recomputes the checksums listed in a manifest; returns the files that differ.
pub fn verify_checksums(dir: &Path, manifest: &RunManifest) -> Result<Vec<PathBuf>> {
    let mut bad = Vec::new();
    for out in &manifest.outputs {
        let path = dir.join(&out.file);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        if sha256_hex(&bytes) != out.sha256 {
            bad.push(path);
        }
    }
    Ok(bad)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Flat key-value table, printed as `key,value` CSV or a JSON object.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KeyValues(pub Vec<(String, Cell)>);

impl KeyValues {
    pub fn push(&mut self, key: impl Into<String>, value: impl Into<Cell>) {
        self.0.push((key.into(), value.into()));
    }

    pub fn get(&self, key: &str) -> Option<&Cell> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => {
                let mut out = String::from("key,value\n");
                for (k, v) in &self.0 {
                    let text = match v {
                        Cell::Num(x) => format_number(*x)?,
                        Cell::Int(i) => i.to_string(),
                        Cell::Bool(b) => b.to_string(),
                        Cell::Text(s) if s.contains([',', '"', '\n']) => {
                            format!("\"{}\"", s.replace('"', "\"\""))
                        }
                        Cell::Text(s) => s.clone(),
                        Cell::Empty => String::new(),
                    };
                    writeln!(out, "{k},{text}").expect("write to string");
                }
                Ok(out)
            }
            Format::Json => {
                let mut map = serde_json::Map::new();
                for (k, v) in &self.0 {
                    let value = match v {
                        Cell::Num(x) => {
                            let rounded: f64 = format_number(*x)?.parse().expect("formatted float parses");
                            serde_json::json!(rounded)
                        }
                        Cell::Int(i) => serde_json::json!(i),
                        Cell::Bool(b) => serde_json::json!(b),
                        Cell::Text(s) => serde_json::json!(s),
                        Cell::Empty => serde_json::Value::Null,
                    };
                    map.insert(k.clone(), value);
                }
                Ok(serde_json::to_string_pretty(&map).expect("map serializes") + "\n")
            }
        }
    }
}
