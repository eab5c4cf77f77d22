//! Tables written as CSV or JSON into the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            // 17 significant digits round-trip every f64
            Cell::Float(v) if v.is_finite() => format!("{v:.16e}"),
            Cell::Float(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => Value::from(*v),
            Cell::Float(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::from(s.as_str()),
            Cell::Bool(b) => Value::from(*b),
        }
    }
}

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table { header: header.iter().map(|h| h.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($crate::output::Cell::from($x)),*] };
}

/// Output directory plus format; remembers what it wrote.
pub struct Sink {
    dir: PathBuf,
    format: Format,
    written: Vec<String>,
}

impl Sink {
    pub fn new(dir: &Path, format: Format) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Sink { dir: dir.to_path_buf(), format, written: Vec::new() })
    }

    pub fn table(&mut self, stem: &str, table: &Table) -> Result<(), CliError> {
        let name = match self.format {
            Format::Csv => format!("{stem}.csv"),
            Format::Json => format!("{stem}.json"),
        };
        let path = self.dir.join(&name);
        let bytes = match self.format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&table.header).map_err(|e| CliError::io(&path, e.into()))?;
                for r in &table.rows {
                    w.write_record(r.iter().map(Cell::csv)).map_err(|e| CliError::io(&path, e.into()))?;
                }
                w.into_inner().map_err(|e| CliError::io(&path, e.into_error()))?
            }
            Format::Json => {
                let rows: Vec<Value> = table
                    .rows
                    .iter()
                    .map(|r| {
                        let obj: Map<String, Value> =
                            table.header.iter().cloned().zip(r.iter().map(Cell::json)).collect();
                        Value::Object(obj)
                    })
                    .collect();
                let mut s = serde_json::to_vec_pretty(&rows).expect("rows serialize");
                s.push(b'\n');
                s
            }
        };
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        log::info!("wrote {}", path.display());
        self.written.push(name);
        Ok(())
    }

    /// `summary.json`, listing the files written before it.
    pub fn summary(&mut self, mut summary: Value) -> Result<(), CliError> {
        if let Value::Object(m) = &mut summary {
            m.insert("files".into(), Value::from(self.written.clone()));
        }
        let path = self.dir.join("summary.json");
        let mut s = serde_json::to_vec_pretty(&summary).expect("summary serializes");
        s.push(b'\n');
        fs::write(&path, s).map_err(|e| CliError::io(&path, e))?;
        log::info!("wrote {}", path.display());
        Ok(())
    }
}
