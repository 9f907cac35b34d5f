//! Plain-text matrix interchange.
//!
//! First line `rows cols`, then one matrix row per line with space-separated
//! decimals. Vectors use the same format with either one row or one column.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::matrix::DenseMatrix;
use crate::linalg::vector::Vector;

pub fn parse_matrix(text: &str) -> Result<DenseMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing 'rows cols' header".into(),
    })?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse {
            line: hline,
            msg: format!("bad header: {e}"),
        })?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse {
            line: hline,
            msg: "header must be 'rows cols'".into(),
        });
    };

    let mut entries = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (lineno, line) in lines {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: lineno,
                msg: e.to_string(),
            })?;
        if row.len() != cols {
            return Err(Error::Parse {
                line: lineno,
                msg: format!("expected {cols} values, found {}", row.len()),
            });
        }
        if row.iter().any(|x| !x.is_finite()) {
            return Err(Error::Parse {
                line: lineno,
                msg: "non-finite entry".into(),
            });
        }
        entries.extend(row);
        seen += 1;
    }
    if seen != rows {
        return Err(Error::Parse {
            line: hline,
            msg: format!("header declares {rows} rows, found {seen}"),
        });
    }
    DenseMatrix::new(rows, cols, entries)
}

pub fn format_matrix(m: &DenseMatrix) -> String {
    let mut out = format!("{} {}\n", m.rows(), m.cols());
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|x| format_f64(*x)).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

/// Accepts an `n 1` column or a `1 n` row.
pub fn parse_vector(text: &str) -> Result<Vector> {
    let m = parse_matrix(text)?;
    if m.cols() == 1 || m.rows() == 1 {
        Ok(m.entries().to_vec())
    } else {
        Err(Error::Parse {
            line: 1,
            msg: format!("expected a vector, got {}x{}", m.rows(), m.cols()),
        })
    }
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_matrix(&text)
}

pub fn read_vector(path: &Path) -> Result<Vector> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_vector(&text)
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}
