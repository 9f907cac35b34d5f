//! Report emission as CSV or JSON.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::io::format_f64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    #[default]
    Json,
}

/// Anything the CLI can write out. JSON comes from `Serialize`; the CSV form
/// is a flat table chosen per report.
pub trait Report: Serialize {
    fn to_csv(&self) -> String;
}

pub fn render<R: Report>(report: &R, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => serde_json::to_string_pretty(report)
            .map(|mut s| {
                s.push('\n');
                s
            })
            .map_err(|e| Error::Io(e.to_string())),
        ReportFormat::Csv => Ok(report.to_csv()),
    }
}

/// Writes to `path`, or stdout when `None`.
pub fn write_output(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Minimal CSV builder. Cells never contain commas or quotes here, so no
/// escaping is done.
#[derive(Debug, Clone, Default)]
pub struct CsvTable {
    lines: Vec<String>,
}

impl CsvTable {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        let h: Vec<&str> = header.iter().map(AsRef::as_ref).collect();
        Self {
            lines: vec![h.join(",")],
        }
    }

    pub fn row(&mut self, label: impl std::fmt::Display, values: &[f64]) -> &mut Self {
        let mut cells = vec![label.to_string()];
        cells.extend(values.iter().map(|v| num(*v)));
        self.lines.push(cells.join(","));
        self
    }

    pub fn raw_row(&mut self, cells: &[String]) -> &mut Self {
        self.lines.push(cells.join(","));
        self
    }

    pub fn finish(&self) -> String {
        let mut s = self.lines.join("\n");
        s.push('\n');
        s
    }
}

/// CSV number cell: 17 significant digits, `.` decimal separator.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format_f64(v)
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}
