use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::CliError;

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v as u64)
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

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

/// Header plus rows, rendered as CSV with 17 significant digits per float.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, c) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match c {
                    Cell::Int(v) => write!(out, "{v}").unwrap(),
                    Cell::Float(v) => write!(out, "{v:.16e}").unwrap(),
                    Cell::Text(s) => out.push_str(s),
                    Cell::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Result of one experiment run.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    pub summary: Value,
    pub pass: bool,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    experiment: &'a str,
    version: &'a str,
    seed: u64,
    pass: bool,
    csv: &'a str,
    config: &'a ExperimentConfig,
    summary: &'a Value,
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.to_path_buf(), source: e })
}

/// Writes `<out>/<name>.csv` and its `<out>/<name>.json` sidecar. Returns the
/// CSV path.
pub fn write_outcome(cfg: &ExperimentConfig, outcome: &Outcome) -> Result<PathBuf, CliError> {
    ensure_dir(&cfg.out)?;
    let name = cfg.experiment.name();
    let csv_name = format!("{name}.csv");
    let csv_path = cfg.out.join(&csv_name);
    write(&csv_path, &outcome.table.to_csv())?;
    let sidecar = Sidecar {
        experiment: name,
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        pass: outcome.pass,
        csv: &csv_name,
        config: cfg,
        summary: &outcome.summary,
    };
    let mut json = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    json.push('\n');
    write(&cfg.out.join(format!("{name}.json")), &json)?;
    Ok(csv_path)
}

/// Aggregates every sidecar in `dir` into `report.csv` and `report.json`.
pub fn write_report(dir: &Path) -> Result<Outcome, CliError> {
    let entries = fs::read_dir(dir).map_err(|e| CliError::Io { path: dir.to_path_buf(), source: e })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && p.file_stem().is_some_and(|s| s != "report"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Config(format!("no experiment sidecars found in {}", dir.display())));
    }
    let mut table = Table::new(vec!["experiment", "csv", "seed", "paths", "pass"]);
    let mut all = true;
    for f in &files {
        let text = fs::read_to_string(f).map_err(|e| CliError::Io { path: f.clone(), source: e })?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: not a sidecar: {e}", f.display())))?;
        let field = |k: &str| v.get(k).cloned().unwrap_or(Value::Null);
        let pass = field("pass").as_bool().unwrap_or(false);
        all &= pass;
        table.push(vec![
            field("experiment").as_str().unwrap_or("?").into(),
            field("csv").as_str().unwrap_or("?").into(),
            field("seed").as_u64().unwrap_or(0).into(),
            v.pointer("/config/paths").and_then(Value::as_u64).unwrap_or(0).into(),
            pass.into(),
        ]);
    }
    write(&dir.join("report.csv"), &table.to_csv())?;
    let summary = serde_json::json!({ "experiments": files.len(), "pass": all });
    let mut json = serde_json::to_string_pretty(&summary).expect("report serializes");
    json.push('\n');
    write(&dir.join("report.json"), &json)?;
    Ok(Outcome { table, summary, pass: all })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_format() {
        let mut t = Table::new(vec!["a", "b", "c"]);
        t.push(vec![1usize.into(), 0.1.into(), true.into()]);
        t.push(vec![2usize.into(), (-3.0).into(), "x".into()]);
        assert_eq!(t.to_csv(), "a,b,c\n1,1.0000000000000001e-1,true\n2,-3.0000000000000000e0,x\n");
    }
}
