//! Sketching the sample covariance matrix with its diagonal removed, and
//! scanning it for strongly correlated pairs.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use crate::matrix::{DenseMatrix, Operand, Transposed};
use crate::recovery::{compressed_product_recoverable_with, default_codes, CodeParams, RecoverableSketch};
use crate::sketch::{compressed_product_with, SketchParams, SketchSet};
use crate::{Error, Exec, Result};

/// `n` variables observed `m` times, stored as an `n x m` matrix whose
/// columns are the observations.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    data: DenseMatrix,
}

/// How a CSV table maps onto variables and observations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Orientation {
    /// One row per variable, one column per observation.
    #[default]
    VariablesAsRows,
    /// One row per observation, one column per variable.
    ObservationsAsRows,
}

impl SampleSet {
    pub fn new(data: DenseMatrix) -> Result<Self> {
        if data.cols() < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 observations, got {}",
                data.cols()
            )));
        }
        if data.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("samples must be finite".into()));
        }
        Ok(SampleSet { data })
    }

    pub fn from_csv_path(path: impl AsRef<Path>, orientation: Orientation) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_csv(file, orientation, path)
    }

    /// Comma-separated numbers with an optional header row (detected by a
    /// non-numeric field in the first record). `origin` labels errors.
    pub fn from_csv<R: Read>(reader: R, orientation: Orientation, origin: impl AsRef<Path>) -> Result<Self> {
        let origin = origin.as_ref();
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut width = None;
        for (idx, rec) in rdr.records().enumerate() {
            let line = idx + 1;
            let rec = rec.map_err(|e| {
                let line = e.position().map_or(line, |p| p.line() as usize);
                Error::parse(origin, line, e.to_string())
            })?;
            let line = rec.position().map_or(line, |p| p.line() as usize);
            if rec.len() == 1 && rec[0].is_empty() {
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
            let values = match parsed {
                Ok(v) => v,
                Err(_) if idx == 0 => continue,
                Err(_) => {
                    let bad = rec.iter().find(|f| f.parse::<f64>().is_err()).unwrap_or_default();
                    return Err(Error::parse(origin, line, format!("bad number {bad:?}")));
                }
            };
            if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
                return Err(Error::parse(origin, line, format!("non-finite value {bad}")));
            }
            match width {
                None => width = Some(values.len()),
                Some(w) if w != values.len() => {
                    return Err(Error::parse(
                        origin,
                        line,
                        format!("row {line} has {} fields, expected {w}", values.len()),
                    ))
                }
                _ => {}
            }
            rows.push(values);
        }
        let w = width.ok_or_else(|| Error::parse(origin, 1, "no data rows".to_string()))?;
        let h = rows.len();
        let data = match orientation {
            Orientation::VariablesAsRows => DenseMatrix::from_fn(h, w, |r, c| rows[r][c]),
            Orientation::ObservationsAsRows => DenseMatrix::from_fn(w, h, |r, c| rows[c][r]),
        };
        Self::new(data)
    }

    pub fn variables(&self) -> usize {
        self.data.rows()
    }

    pub fn observations(&self) -> usize {
        self.data.cols()
    }

    pub fn data(&self) -> &DenseMatrix {
        &self.data
    }
}

/// `M = (A - mean 1^T) / sqrt(m - 1)`, so that `M M^T` is the sample covariance.
pub fn center_and_scale(s: &SampleSet) -> DenseMatrix {
    center_and_scale_with(s, Exec::default())
}

pub fn center_and_scale_with(s: &SampleSet, exec: Exec) -> DenseMatrix {
    let (n, m) = (s.variables(), s.observations());
    let scale = 1.0 / ((m - 1) as f64).sqrt();
    let mut out = s.data.as_slice().to_vec();
    exec.for_each_chunk_mut(&mut out, m, |_, row| {
        let mean = row.iter().sum::<f64>() / m as f64;
        for v in row.iter_mut() {
            *v = (*v - mean) * scale;
        }
    });
    DenseMatrix::new(n, m, out).expect("shape preserved")
}

#[derive(Clone, Debug, PartialEq)]
pub enum GramSketch {
    Plain(SketchSet),
    Recoverable(RecoverableSketch),
}

/// Sketch of `M M^T` with the diagonal subtracted, plus the exact diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceSketch {
    pub sketch: GramSketch,
    pub diagonal: Vec<f64>,
}

/// Whether to build the code-masked families as well.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SketchMode {
    #[default]
    Plain,
    Recoverable(CodeParams),
}

/// Sketch of `A A^T` with its diagonal removed.
pub fn sketch_gram<M: Operand>(a: &M, params: &SketchParams, mode: SketchMode, exec: Exec) -> Result<CovarianceSketch> {
    let n = a.nrows();
    let diagonal: Vec<f64> = (0..n)
        .map(|i| {
            let mut s = 0.0;
            a.for_each_in_row(i, |_, v| s += v * v);
            s
        })
        .collect();
    let at = Transposed(a);
    let sketch = match mode {
        SketchMode::Plain => {
            let mut sk = compressed_product_with(a, &at, params, exec)?;
            for (i, &q) in diagonal.iter().enumerate() {
                sk.add_to_entry(i, i, -q);
            }
            GramSketch::Plain(sk)
        }
        SketchMode::Recoverable(cp) => {
            let (rc, cc) = default_codes(n, n, &cp, params.seed())?;
            let mut sk = compressed_product_recoverable_with(a, &at, params, &rc, &cc, exec)?;
            for (i, &q) in diagonal.iter().enumerate() {
                sk.add_to_entry(i, i, -q);
            }
            GramSketch::Recoverable(sk)
        }
    };
    Ok(CovarianceSketch { sketch, diagonal })
}

pub fn sketch_covariance(s: &SampleSet, params: &SketchParams, mode: SketchMode) -> Result<CovarianceSketch> {
    sketch_covariance_with(s, params, mode, Exec::default())
}

pub fn sketch_covariance_with(s: &SampleSet, params: &SketchParams, mode: SketchMode, exec: Exec) -> Result<CovarianceSketch> {
    let m = center_and_scale_with(s, exec);
    sketch_gram(&m, params, mode, exec)
}

impl CovarianceSketch {
    pub fn variables(&self) -> usize {
        self.diagonal.len()
    }

    /// Estimate of the off-diagonal entry `(i, j)`; on the diagonal this
    /// estimates zero.
    pub fn estimate(&self, i: usize, j: usize) -> Result<f64> {
        Ok(match &self.sketch {
            GramSketch::Plain(s) => s.decompress(i, j)?.value,
            GramSketch::Recoverable(s) => s.decompress(i, j)?.value,
        })
    }
}

/// Pairs `i < j` whose estimate exceeds `delta` in magnitude, largest first.
///
/// Plain sketches are scanned over all pairs; recoverable ones only over the
/// positions returned by the significant-entry search.
pub fn scan_correlations(cs: &CovarianceSketch, delta: f64) -> Result<Vec<(usize, usize, f64)>> {
    scan_correlations_with(cs, delta, Exec::default())
}

pub fn scan_correlations_with(cs: &CovarianceSketch, delta: f64, exec: Exec) -> Result<Vec<(usize, usize, f64)>> {
    let n = cs.variables();
    let mut out = Vec::new();
    match &cs.sketch {
        GramSketch::Plain(s) => {
            let all = s.decompress_all_with(usize::MAX, exec)?;
            for i in 0..n {
                for j in i + 1..n {
                    let v = all.get(i, j);
                    if v.abs() > delta {
                        out.push((i, j, v));
                    }
                }
            }
        }
        GramSketch::Recoverable(s) => {
            let cands = s.find_significant_entries_with(delta, exec)?;
            let mut pairs: Vec<(usize, usize)> = cands
                .positions
                .iter()
                .filter(|p| p.0 != p.1)
                .map(|&(i, j, _)| (i.min(j), i.max(j)))
                .collect();
            pairs.sort_unstable();
            pairs.dedup();
            for (i, j) in pairs {
                let v = s.decompress(i, j)?.value;
                if v.abs() > delta {
                    out.push((i, j, v));
                }
            }
        }
    }
    out.sort_by(|x, y| y.2.abs().total_cmp(&x.2.abs()).then((x.0, x.1).cmp(&(y.0, y.1))));
    Ok(out)
}
