//! Matrix files: `{"dim": n, "entries": [[re, im], ...]}`, row-major,
//! exactly `n²` pairs. Floats are written in shortest round-trip form.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{is_finite, CMat, C64};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

pub fn parse_matrix(text: &str) -> Result<CMat> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let n = file.dim;
    if file.entries.len() != n * n {
        return Err(Error::DimensionMismatch { expected: n * n, got: file.entries.len() });
    }
    Ok(CMat::from_fn(n, n, |i, j| {
        let [re, im] = file.entries[i * n + j];
        C64::new(re, im)
    }))
}

pub fn format_matrix(m: &CMat) -> Result<String> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if !is_finite(m) {
        return Err(Error::NonFinite);
    }
    let n = m.nrows();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            entries.push([m[(i, j)].re, m[(i, j)].im]);
        }
    }
    serde_json::to_string(&MatrixFile { dim: n, entries }).map_err(|e| Error::Io(e.to_string()))
}

pub fn read_matrix(path: &Path) -> Result<CMat> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_matrix(&text)
}

pub fn write_matrix(path: &Path, m: &CMat) -> Result<()> {
    let text = format_matrix(m)?;
    fs::write(path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_by_one_zero() {
        let m = parse_matrix(r#"{"dim": 1, "entries": [[0, 0]]}"#).unwrap();
        assert_eq!(m, CMat::zeros(1, 1));
    }

    #[test]
    fn wrong_entry_count() {
        let err = parse_matrix(r#"{"dim": 2, "entries": [[0, 0], [1, 0], [2, 0]]}"#).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 4, got: 3 });
    }

    #[test]
    fn malformed_input_reports_location() {
        let err = parse_matrix("{\"dim\": 1,\n \"entries\": [[0, ]]}").unwrap_err();
        match err {
            Error::Parse { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn awkward_floats_round_trip() {
        let m = CMat::from_row_slice(1, 1, &[C64::new(0.1 + 0.2, -1e-300)]);
        assert_eq!(parse_matrix(&format_matrix(&m).unwrap()).unwrap(), m);
        assert_eq!(format_matrix(&CMat::from_element(1, 1, C64::new(f64::NAN, 0.0))), Err(Error::NonFinite));
    }
}
