//! Output artifacts: JSONL replica records with a `.meta.json` sidecar, and
//! plain numeric CSV tables.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub const ARTIFACT: &str = "covertree";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A record that belongs to one replica.
pub trait Keyed {
    fn replica(&self) -> u64;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkRecord {
    pub replica: u64,
    /// Master seed of the run.
    pub seed: u64,
    pub tau_t: Option<f64>,
    pub cover_time: Option<f64>,
    pub covered: bool,
    pub jumps: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRecord {
    pub replica: u64,
    pub min_leaf: f64,
    pub zero_leaves: u64,
    pub covered: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub level_min: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub level_mean: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GffRecord {
    pub replica: u64,
    pub max_all: f64,
    pub max_leaf: f64,
    pub argmax_level: u32,
}

macro_rules! keyed {
    ($($t:ty),*) => {$(
        impl Keyed for $t {
            fn replica(&self) -> u64 {
                self.replica
            }
        }
    )*};
}
keyed!(WalkRecord, FieldRecord, GffRecord);

/// The replica summary every stochastic run prints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryLine {
    pub statistic: String,
    pub estimate: f64,
    pub stderr: f64,
    pub replicas: u64,
    pub master_seed: u64,
}

impl SummaryLine {
    pub fn new(statistic: &str, s: &covertree_core::harness::ReplicaSummary) -> Self {
        Self {
            statistic: statistic.to_string(),
            estimate: s.estimate,
            stderr: s.stderr,
            replicas: s.replicas,
            master_seed: s.master_seed,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("summary serializes")
    }
}

/// Buffered file, or stdout when `path` is absent.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(CliError::io(p))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout()))),
    }
}

fn io_ctx(path: Option<&Path>) -> PathBuf {
    path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf)
}

/// Sorts by replica id and writes one JSON object per line.
pub fn write_jsonl<R: Serialize + Keyed>(mut records: Vec<R>, path: Option<&Path>) -> Result<()> {
    records.sort_by_key(Keyed::replica);
    let mut w = sink(path)?;
    for r in &records {
        let line = serde_json::to_string(r).map_err(|e| CliError::Data(e.to_string()))?;
        writeln!(w, "{line}").map_err(CliError::io(io_ctx(path)))?;
    }
    w.flush().map_err(CliError::io(io_ctx(path)))
}

pub fn read_jsonl(path: &Path) -> Result<Vec<Value>> {
    let f = File::open(path).map_err(CliError::io(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(CliError::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let v = serde_json::from_str(&line)
            .map_err(|e| CliError::Data(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(v);
    }
    Ok(out)
}

/// `x.jsonl` → `x.meta.json`.
pub fn meta_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

/// Writes the sidecar for `out`: full config, seed, artifact version and any
/// command-specific fields.
pub fn write_meta(out: &Path, cfg: &ExperimentConfig, extra: Value) -> Result<()> {
    let config: serde_json::Map<String, Value> = cfg
        .to_pairs()
        .into_iter()
        .map(|(k, v)| (k.to_string(), Value::String(v)))
        .collect();
    let mut meta = serde_json::json!({
        "artifact": ARTIFACT,
        "version": VERSION,
        "command": cfg.command.name(),
        "seed": cfg.seed,
        "config": config,
    });
    if let (Value::Object(m), Value::Object(x)) = (&mut meta, extra) {
        m.extend(x);
    }
    let path = meta_path(out);
    let text = serde_json::to_string_pretty(&meta).map_err(|e| CliError::Data(e.to_string()))?;
    std::fs::write(&path, text + "\n").map_err(CliError::io(&path))
}

pub fn read_meta(data: &Path) -> Result<Value> {
    let path = meta_path(data);
    let text = std::fs::read_to_string(&path).map_err(CliError::io(&path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Full-precision, locale-free number: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// A CSV table of unquoted fields.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        debug_assert!(
            row.iter().all(|f| !f.contains(',')),
            "unquoted field with a comma"
        );
        self.rows.push(row);
    }

    pub fn write(&self, path: Option<&Path>) -> Result<()> {
        let mut w = sink(path)?;
        let ctx = io_ctx(path);
        writeln!(w, "{}", self.header.join(",")).map_err(CliError::io(&ctx))?;
        for r in &self.rows {
            writeln!(w, "{}", r.join(",")).map_err(CliError::io(&ctx))?;
        }
        w.flush().map_err(CliError::io(&ctx))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<String> = lines
            .next()
            .ok_or_else(|| CliError::Data(format!("{}: empty table", path.display())))?
            .split(',')
            .map(|s| s.trim().to_string())
            .collect();
        let mut rows = Vec::new();
        for (i, l) in lines.enumerate() {
            let row: Vec<String> = l.split(',').map(|s| s.trim().to_string()).collect();
            if row.len() != header.len() {
                return Err(CliError::Data(format!(
                    "{}: row {} has {} fields, header has {}",
                    path.display(),
                    i + 2,
                    row.len(),
                    header.len()
                )));
            }
            rows.push(row);
        }
        Ok(Self { header, rows })
    }

    pub fn has(&self, name: &str) -> bool {
        self.header.iter().any(|h| h == name)
    }

    /// A numeric column; empty cells are an error.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self
            .header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Data(format!("missing column `{name}`")))?;
        self.rows
            .iter()
            .map(|r| {
                r[j].parse::<f64>()
                    .map_err(|_| CliError::Data(format!("column `{name}`: bad number `{}`", r[j])))
            })
            .collect()
    }
}
