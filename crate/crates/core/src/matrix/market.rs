//! Matrix Market (`.mtx`) I/O: coordinate and array formats, real field,
//! general or symmetric storage.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::{Layout, Operand, SparseMatrix};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarketFormat {
    Coordinate,
    Array,
}

pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_matrix_market(BufReader::new(file), path)
}

/// Parses Matrix Market text. `origin` only labels error messages.
///
/// Explicit zeros are dropped and symmetric storage is expanded. The result is
/// column-major.
pub fn read_matrix_market<R: BufRead>(reader: R, origin: impl AsRef<Path>) -> Result<SparseMatrix> {
    let origin = origin.as_ref();
    let err = |line: usize, msg: String| Error::parse(origin, line, msg);

    let mut lines = reader.lines().enumerate().map(|(n, l)| (n + 1, l));
    let mut next_line = || -> Result<Option<(usize, String)>> {
        match lines.next() {
            None => Ok(None),
            Some((n, Ok(s))) => Ok(Some((n, s))),
            Some((n, Err(e))) => Err(Error::parse(origin, n, e.to_string())),
        }
    };

    let (hline, header) = next_line()?.ok_or_else(|| err(1, "empty file".into()))?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(err(hline, format!("bad header: {header:?}")));
    }
    let format = match tokens[2].as_str() {
        "coordinate" => MarketFormat::Coordinate,
        "array" => MarketFormat::Array,
        other => return Err(err(hline, format!("unknown format {other:?}"))),
    };
    match tokens[3].as_str() {
        "real" | "double" | "integer" => {}
        other => return Err(err(hline, format!("unsupported field {other:?}; only real values are accepted"))),
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(err(hline, format!("unsupported symmetry {other:?}"))),
    };

    // Skip comments and blank lines.
    let mut data_line = || -> Result<Option<(usize, String)>> {
        while let Some((n, s)) = next_line()? {
            let t = s.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            return Ok(Some((n, t.to_string())));
        }
        Ok(None)
    };

    let (sline, size) = data_line()?.ok_or_else(|| err(hline + 1, "missing size line".into()))?;
    let dims: Vec<&str> = size.split_whitespace().collect();
    let parse_count = |s: &str| -> Result<usize> {
        s.parse::<usize>()
            .map_err(|_| err(sline, format!("bad dimension {s:?}")))
    };
    let expected_fields = if format == MarketFormat::Coordinate { 3 } else { 2 };
    if dims.len() != expected_fields {
        return Err(err(sline, format!("expected {expected_fields} size fields, got {}", dims.len())));
    }
    let rows = parse_count(dims[0])?;
    let cols = parse_count(dims[1])?;
    if rows.checked_mul(cols).is_none() {
        return Err(err(sline, format!("dimensions {rows}x{cols} overflow")));
    }
    if symmetric && rows != cols {
        return Err(err(sline, "symmetric matrix must be square".into()));
    }

    let parse_value = |line: usize, s: &str| -> Result<f64> {
        let v: f64 = s.parse().map_err(|_| err(line, format!("bad value {s:?}")))?;
        if !v.is_finite() {
            return Err(err(line, format!("non-finite value {s:?}")));
        }
        Ok(v)
    };

    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut push = |r: usize, c: usize, v: f64| {
        if v != 0.0 {
            triplets.push((r, c, v));
            if symmetric && r != c {
                triplets.push((c, r, v));
            }
        }
    };

    match format {
        MarketFormat::Coordinate => {
            let entries = parse_count(dims[2])?;
            for _ in 0..entries {
                let (n, line) = data_line()?
                    .ok_or_else(|| err(sline, format!("file ends before {entries} entries")))?;
                let f: Vec<&str> = line.split_whitespace().collect();
                if f.len() != 3 {
                    return Err(err(n, format!("expected 'row col value', got {line:?}")));
                }
                let index = |s: &str| -> Result<usize> {
                    s.parse::<usize>().map_err(|_| err(n, format!("bad index {s:?}")))
                };
                let (r, c) = (index(f[0])?, index(f[1])?);
                if r == 0 || c == 0 || r > rows || c > cols {
                    return Err(err(
                        n,
                        format!("index ({r}, {c}) out of range for {rows}x{cols} (1-based)"),
                    ));
                }
                if symmetric && c > r {
                    return Err(err(n, format!("entry ({r}, {c}) above the diagonal in symmetric storage")));
                }
                push(r - 1, c - 1, parse_value(n, f[2])?);
            }
        }
        MarketFormat::Array => {
            // Column-major; symmetric storage lists only the lower triangle.
            for c in 0..cols {
                let start = if symmetric { c } else { 0 };
                for r in start..rows {
                    let (n, line) = data_line()?
                        .ok_or_else(|| err(sline, "file ends before all array values".into()))?;
                    let f: Vec<&str> = line.split_whitespace().collect();
                    if f.len() != 1 {
                        return Err(err(n, format!("expected one value, got {line:?}")));
                    }
                    push(r, c, parse_value(n, f[0])?);
                }
            }
        }
    }
    if let Some((n, extra)) = data_line()? {
        return Err(err(n, format!("unexpected trailing data {extra:?}")));
    }

    SparseMatrix::from_triplets(rows, cols, triplets, Layout::ColumnMajor)
}

/// Writes `m` in Matrix Market general storage. Values use the shortest
/// representation that round-trips.
pub fn write_matrix_market<W: Write, M: Operand>(mut w: W, m: &M, format: MarketFormat) -> std::io::Result<()> {
    match format {
        MarketFormat::Coordinate => {
            writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
            writeln!(w, "{} {} {}", m.nrows(), m.ncols(), m.nnz())?;
            for r in 0..m.nrows() {
                let mut res = Ok(());
                m.for_each_in_row(r, |c, v| {
                    if res.is_ok() {
                        res = writeln!(w, "{} {} {:?}", r + 1, c + 1, v);
                    }
                });
                res?;
            }
        }
        MarketFormat::Array => {
            writeln!(w, "%%MatrixMarket matrix array real general")?;
            writeln!(w, "{} {}", m.nrows(), m.ncols())?;
            let dense = m.to_dense();
            for c in 0..m.ncols() {
                for r in 0..m.nrows() {
                    writeln!(w, "{:?}", dense.get(r, c))?;
                }
            }
        }
    }
    Ok(())
}
