//! Tabular data files and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::config::{ExperimentConfig, Format};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    pub fn opt(v: Option<f64>) -> Cell {
        v.map_or(Cell::Empty, Cell::Num)
    }

    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => ryu::Buffer::new().format(*v).to_string(),
            Cell::Int(v) => format!("{v}"),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) if v.is_finite() => json!(v),
            Cell::Int(v) => json!(v),
            Cell::Text(s) => json!(s),
            _ => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

/// Rows under a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: &'static [&'static str],
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &'static [&'static str]) -> Table {
        Table {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        w.into_inner().map_err(|e| CliError::config(format!("output: {e}")))
    }

    pub fn to_json(&self, experiment: &str) -> Result<Vec<u8>, CliError> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), v.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let doc = json!({
            "experiment": experiment,
            "columns": self.columns,
            "rows": rows,
        });
        let mut bytes = serde_json::to_vec_pretty(&doc)?;
        bytes.push(b'\n');
        Ok(bytes)
    }
}

/// Everything an experiment produced, ready to be written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    /// Grid sizes and spacings actually used.
    pub grid: Value,
    /// Headline numbers.
    pub summary: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub timestamp_unix: u64,
    pub experiment: &'static str,
    pub threads: usize,
    pub config: &'a ExperimentConfig,
    pub grid: &'a Value,
    pub outputs: Vec<String>,
    pub summary: &'a Value,
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Writes the data file and `manifest.json` into the configured directory.
pub fn write_outputs(cfg: &ExperimentConfig, outcome: &Outcome, threads: usize) -> Result<Vec<PathBuf>, CliError> {
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir).map_err(|e| CliError::config(format!("output.dir `{}`: {e}", dir.display())))?;
    let (name, bytes) = match cfg.output.format {
        Format::Csv => (format!("{}.csv", cfg.experiment.file_stem()), outcome.table.to_csv()?),
        Format::Json => (
            format!("{}.json", cfg.experiment.file_stem()),
            outcome.table.to_json(cfg.experiment.name())?,
        ),
    };
    let data = dir.join(&name);
    write(&data, &bytes)?;
    let manifest = Manifest {
        tool: "spinmeter",
        version: env!("CARGO_PKG_VERSION"),
        timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        experiment: cfg.experiment.name(),
        threads,
        config: cfg,
        grid: &outcome.grid,
        outputs: vec![name],
        summary: &outcome.summary,
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest)?;
    bytes.push(b'\n');
    let man = dir.join(MANIFEST_FILE);
    write(&man, &bytes)?;
    Ok(vec![data, man])
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::config(format!("cannot write `{}`: {e}", path.display())))
}
