//! Plain-text matrix exchange format.
//!
//! First line: `rows cols`. Then one whitespace-separated row per line.
//! Everything is full-precision `f64`; comments start with `#` and blank
//! lines are skipped.

use std::io::{BufRead, Write};

use faer::Mat;

use crate::error::{Error, Result};

pub fn write_matrix<W: Write>(w: &mut W, m: &Mat<f64>) -> std::io::Result<()> {
    writeln!(w, "{} {}", m.nrows(), m.ncols())?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if j > 0 {
                write!(w, " ")?;
            }
            write!(w, "{:.17e}", m[(i, j)])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_matrix<R: BufRead>(r: &mut R) -> Result<Mat<f64>> {
    let mut values: Vec<f64> = Vec::new();
    let mut shape: Option<(usize, usize)> = None;
    for line in r.lines() {
        let line = line.map_err(|e| Error::InvalidInput(format!("read error: {e}")))?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if shape.is_none() {
            let mut it = line.split_whitespace();
            let rows = it
                .next()
                .and_then(|t| t.parse::<usize>().ok())
                .ok_or_else(|| Error::InvalidInput("missing row count".into()))?;
            let cols = it
                .next()
                .and_then(|t| t.parse::<usize>().ok())
                .ok_or_else(|| Error::InvalidInput("missing column count".into()))?;
            if it.next().is_some() {
                return Err(Error::InvalidInput("malformed header line".into()));
            }
            shape = Some((rows, cols));
            continue;
        }
        for tok in line.split_whitespace() {
            values.push(
                tok.parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("bad number {tok:?}")))?,
            );
        }
    }
    let (rows, cols) = shape.ok_or_else(|| Error::InvalidInput("empty matrix file".into()))?;
    if values.len() != rows * cols {
        return Err(Error::InvalidInput(format!(
            "expected {} values, found {}",
            rows * cols,
            values.len()
        )));
    }
    Ok(Mat::from_fn(rows, cols, |i, j| values[i * cols + j]))
}
