//! Result assembly and emission: CSV and JSON with stable schemas.
//!
//! Column orders are fixed per command and documented in the README.  Floats
//! are rendered as shortest round-trip decimals (up to 17 significant
//! digits), so identical configs and seeds produce byte-identical files.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::errata::ErrataEntry;
use crate::CliError;

/// One table cell.  `Null` marks outputs a failed grid point never produced;
/// it renders as an empty CSV field and JSON `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Null,
    Bool(bool),
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    /// CSV rendering; floats use shortest round-trip formatting.
    pub fn render(&self) -> String {
        match self {
            Cell::Null => String::new(),
            Cell::Bool(b) => b.to_string(),
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format!("{x:?}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<i64> for Cell {
    fn from(i: i64) -> Self {
        Cell::Int(i)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
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

/// One point of the plot-ready robustness series: perturbation strength,
/// measured distance, analytic bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub x: f64,
    pub y: f64,
    pub bound: f64,
}

/// Everything one command run produced, in grid order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultSet {
    /// Command name (kebab-case).
    pub command: String,
    /// Column names, fixed per command.
    pub columns: Vec<String>,
    /// One row per grid point, cells aligned with `columns`.
    pub rows: Vec<Vec<Cell>>,
    /// Plot-ready (x, y, bound) series; robustness sweeps only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<Vec<SeriesPoint>>,
    /// Discrepancies between printed closed forms and validated ones,
    /// attached by commands that recompute them.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errata: Vec<ErrataEntry>,
    /// True iff every asserted check in every row passed.
    pub all_pass: bool,
}

impl ResultSet {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        ResultSet {
            command: command.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            series: None,
            errata: Vec::new(),
            all_pass: true,
        }
    }

    /// Appends a row and folds its pass flag into `all_pass`.
    pub fn push_row(&mut self, row: Vec<Cell>, pass: bool) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
        self.all_pass &= pass;
    }
}

/// Renders the main table as CSV (header plus one line per row).
pub fn render_csv(rs: &ResultSet) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&rs.columns).map_err(csv_err)?;
    for row in &rs.rows {
        w.write_record(row.iter().map(Cell::render)).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Config(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Config(e.to_string()))
}

/// Renders the plot-ready series as a three-column CSV.
pub fn render_series_csv(series: &[SeriesPoint]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "y", "bound"]).map_err(csv_err)?;
    for p in series {
        w.write_record([
            format!("{:?}", p.x),
            format!("{:?}", p.y),
            format!("{:?}", p.bound),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Config(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Config(e.to_string()))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Config(format!("csv encoding failed: {e}"))
}

fn write_file(path: &str, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_string(),
        source,
    })
}

/// Path for the companion series file: `out.csv` → `out.series.csv`.
fn series_path(path: &str) -> String {
    let p = Path::new(path);
    match (p.file_stem(), p.extension()) {
        (Some(stem), Some(ext)) => p
            .with_file_name(format!("{}.series.{}", stem.to_string_lossy(), ext.to_string_lossy()))
            .display()
            .to_string(),
        _ => format!("{path}.series"),
    }
}

/// Writes the result set to `path` (`-` for stdout) in the given format.
///
/// JSON carries the whole result set in one object.  CSV writes the main
/// table to `path`; a robustness series additionally goes to a companion
/// `<stem>.series.<ext>` file (skipped when writing to stdout).
pub fn emit_results(rs: &ResultSet, format: crate::config::Format, path: &str) -> Result<(), CliError> {
    let payload = match format {
        crate::config::Format::Csv => render_csv(rs)?,
        crate::config::Format::Json => {
            let mut s = serde_json::to_string_pretty(rs)
                .map_err(|e| CliError::Config(format!("json encoding failed: {e}")))?;
            s.push('\n');
            s
        }
    };
    if path == "-" {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        lock.write_all(payload.as_bytes()).map_err(|source| CliError::Io {
            path: "<stdout>".to_string(),
            source,
        })?;
        return Ok(());
    }
    write_file(path, &payload)?;
    if format == crate::config::Format::Csv {
        if let Some(series) = &rs.series {
            write_file(&series_path(path), &render_series_csv(series)?)?;
        }
    }
    Ok(())
}
