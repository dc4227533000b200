//! The JSON document every subcommand emits, and the CSV side files.

use std::io::Write;
use std::path::Path;

use lagrangian_lab::report::VerificationReport;
use serde::Serialize;

use crate::config::{Format, Settings};
use crate::CliError;

#[derive(Debug, Serialize)]
pub struct RunSettings {
    pub tol: Option<f64>,
    pub grid: usize,
    pub seed: u64,
}

#[derive(Debug, Serialize)]
pub struct RunOutput {
    pub command: String,
    pub version: String,
    pub settings: RunSettings,
    pub pass: bool,
    pub reports: Vec<VerificationReport>,
    pub data: serde_json::Value,
}

impl RunOutput {
    pub fn new(command: &str, settings: &Settings, reports: Vec<VerificationReport>, data: serde_json::Value) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            settings: RunSettings {
                tol: settings.tol,
                grid: settings.grid,
                seed: settings.seed,
            },
            pass: reports.iter().all(|r| r.pass),
            reports,
            data,
        }
    }
}

/// A named CSV table written next to the report when `--out` is set.
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn reports_csv<W: Write>(reports: &[VerificationReport], w: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["check", "pass", "measured", "expected", "tolerance", "norm", "provenance"])?;
    let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
    for r in reports {
        let norm = serde_json::to_value(r.norm).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        w.write_record([
            r.check.clone(),
            r.pass.to_string(),
            join(&r.measured),
            join(&r.expected),
            r.tolerance.to_string(),
            norm,
            r.provenance.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn table_csv<W: Write>(t: &Table, w: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(&t.header)?;
    for row in &t.rows {
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the run: to `--out` as `<command>.json` or `<command>.csv` plus one CSV per table, or
/// the main document to stdout when no directory is given.
pub fn emit(run: &RunOutput, tables: &[Table], settings: &Settings) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(run).map_err(|e| CliError::Io(e.to_string()))?;
    match &settings.out {
        None => {
            let stdout = std::io::stdout();
            match settings.format {
                Format::Json => writeln!(stdout.lock(), "{json}").map_err(|e| CliError::Io(e.to_string())),
                Format::Csv => reports_csv(&run.reports, stdout.lock()).map_err(|e| CliError::Io(e.to_string())),
            }
        }
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
            match settings.format {
                Format::Json => {
                    let path = dir.join(format!("{}.json", run.command));
                    std::fs::write(&path, json + "\n").map_err(|e| io(&path, e))?;
                }
                Format::Csv => {
                    let path = dir.join(format!("{}.csv", run.command));
                    let f = std::fs::File::create(&path).map_err(|e| io(&path, e))?;
                    reports_csv(&run.reports, f).map_err(|e| io(&path, e))?;
                }
            }
            for t in tables {
                let path = dir.join(format!("{}.csv", t.name));
                let f = std::fs::File::create(&path).map_err(|e| io(&path, e))?;
                table_csv(t, f).map_err(|e| io(&path, e))?;
            }
            Ok(())
        }
    }
}
