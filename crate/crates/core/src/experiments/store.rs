use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::stats::wilson;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

/// One Monte Carlo proportion with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub name: String,
    pub params: BTreeMap<String, Value>,
    pub successes: u64,
    pub samples: u64,
    pub p_hat: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub unknown: u64,
    pub seed: u64,
    pub version: String,
    pub timestamp: u64,
}

impl EstimateRecord {
    pub fn new(name: &str, params: BTreeMap<String, Value>, successes: u64, samples: u64, unknown: u64, seed: u64) -> Result<Self> {
        if successes > samples {
            return Err(Error::InvalidParameter(format!("{successes} successes exceed {samples} samples")));
        }
        let (wilson_lo, wilson_hi) = wilson(successes, samples);
        let p_hat = if samples == 0 { 0.0 } else { successes as f64 / samples as f64 };
        Ok(EstimateRecord {
            name: name.to_string(),
            params,
            successes,
            samples,
            p_hat,
            wilson_lo,
            wilson_hi,
            unknown,
            seed,
            version: VERSION.to_string(),
            timestamp: now(),
        })
    }

    /// Experiment part of `name`, before the first '/'.
    pub fn experiment(&self) -> &str {
        self.name.split('/').next().unwrap_or("")
    }

    /// Event part of `name`, after the first '/'.
    pub fn event(&self) -> &str {
        self.name.split_once('/').map(|(_, e)| e).unwrap_or("")
    }
}

/// Parameter set written before sampling starts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigRecord {
    pub name: String,
    pub config: Value,
    pub seed: u64,
    pub version: String,
    pub timestamp: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StoreLine {
    Config(ConfigRecord),
    Estimate(EstimateRecord),
}

/// Append-only JSONL results store.
#[derive(Clone, Debug)]
pub struct ResultsStore {
    path: PathBuf,
}

impl ResultsStore {
    pub fn new(path: impl AsRef<Path>) -> Self {
        ResultsStore { path: path.as_ref().to_path_buf() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn append_line(&self, line: &str) -> Result<()> {
        if let Some(dir) = self.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut f = OpenOptions::new().create(true).append(true).open(&self.path)?;
        writeln!(f, "{line}")?;
        Ok(())
    }

    pub fn write_config(&self, name: &str, config: Value, seed: u64) -> Result<()> {
        let rec = ConfigRecord { name: format!("{name}/config"), config, seed, version: VERSION.to_string(), timestamp: now() };
        self.append_line(&serde_json::to_string(&rec)?)
    }

    pub fn append(&self, records: &[EstimateRecord]) -> Result<()> {
        let mut buf = String::new();
        for r in records {
            buf.push_str(&serde_json::to_string(r)?);
            buf.push('\n');
        }
        if buf.is_empty() {
            return Ok(());
        }
        self.append_line(buf.trim_end_matches('\n'))
    }

    pub fn read(&self) -> Result<Vec<StoreLine>> {
        read_store(&self.path)
    }
}

pub fn read_store(path: &Path) -> Result<Vec<StoreLine>> {
    let f = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(&line).map_err(|e| Error::Io(format!("line {}: {e}", i + 1)))?;
        let parsed = if v.get("config").is_some() {
            StoreLine::Config(serde_json::from_value(v)?)
        } else {
            StoreLine::Estimate(serde_json::from_value(v)?)
        };
        out.push(parsed);
    }
    Ok(out)
}

pub const CSV_COLUMNS: [&str; 11] =
    ["name", "params", "successes", "samples", "p_hat", "wilson_lo", "wilson_hi", "unknown", "seed", "version", "timestamp"];

/// Records as CSV with the store's columns; `params` is compact JSON.
pub fn write_records_csv(records: &[EstimateRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
    w.write_record(CSV_COLUMNS).map_err(|e| Error::Io(e.to_string()))?;
    for r in records {
        let row = [
            r.name.clone(),
            serde_json::to_string(&r.params)?,
            r.successes.to_string(),
            r.samples.to_string(),
            r.p_hat.to_string(),
            r.wilson_lo.to_string(),
            r.wilson_hi.to_string(),
            r.unknown.to_string(),
            r.seed.to_string(),
            r.version.clone(),
            r.timestamp.to_string(),
        ];
        w.write_record(&row).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// A flat table of derived quantities.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Rows whose first column equals `kind`.
    pub fn rows_of<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a Vec<String>> + 'a {
        self.rows.iter().filter(move |r| r.first().map(String::as_str) == Some(kind))
    }

    pub fn get(&self, row: &[String], column: &str) -> Option<f64> {
        self.column(column).and_then(|i| row.get(i)).and_then(|s| s.parse().ok())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(e.to_string()))?;
        w.write_record(&self.columns).map_err(|e| Error::Io(e.to_string()))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn render(&self) -> String {
        let widths: Vec<usize> = (0..self.columns.len())
            .map(|i| self.rows.iter().map(|r| r[i].len()).chain([self.columns[i].len()]).max().unwrap_or(0))
            .collect();
        let line = |cells: &[String]| {
            cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect::<Vec<_>>().join("  ")
        };
        let mut out = line(&self.columns);
        for r in &self.rows {
            out.push('\n');
            out.push_str(&line(r));
        }
        out
    }
}
