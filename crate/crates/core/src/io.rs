//! Plain-text matrix files: first line `rows cols`, then row-major
//! whitespace-separated decimals. Values are written with the shortest
//! round-tripping representation, so a written file re-reads bit-exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::mat::RealMat;
use crate::{Error, Result};

pub fn matrix_to_string(m: &RealMat) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for i in 0..m.rows() {
        let mut first = true;
        for &v in m.row(i) {
            if !first {
                out.push(' ');
            }
            let _ = write!(out, "{v}");
            first = false;
        }
        out.push('\n');
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<RealMat> {
    let mut tokens = text.split_whitespace();
    let rows: usize = tokens
        .next()
        .ok_or_else(|| Error::File("missing row count".into()))?
        .parse()
        .map_err(|e| Error::File(format!("bad row count: {e}")))?;
    let cols: usize = tokens
        .next()
        .ok_or_else(|| Error::File("missing column count".into()))?
        .parse()
        .map_err(|e| Error::File(format!("bad column count: {e}")))?;
    let mut data = Vec::with_capacity(rows * cols);
    for (i, tok) in tokens.enumerate() {
        let v: f64 = tok
            .parse()
            .map_err(|e| Error::File(format!("bad value #{i}: {e}")))?;
        if !v.is_finite() {
            return Err(Error::File(format!("non-finite value #{i}: {tok}")));
        }
        data.push(v);
    }
    if data.len() != rows * cols {
        return Err(Error::File(format!(
            "expected {} values for a {rows}x{cols} matrix, found {}",
            rows * cols,
            data.len()
        )));
    }
    RealMat::from_vec(rows, cols, data)
}

pub fn write_matrix(path: impl AsRef<Path>, m: &RealMat) -> Result<()> {
    std::fs::write(path.as_ref(), matrix_to_string(m))
        .map_err(|e| Error::File(format!("{}: {e}", path.as_ref().display())))
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<RealMat> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::File(format!("{}: {e}", path.as_ref().display())))?;
    parse_matrix(&text)
}
