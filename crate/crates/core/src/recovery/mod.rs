//! Locating the large entries of `AB` from code-masked sketches.
//!
//! Alongside the ordinary sketch, family `r` of the row code sketches `AB`
//! restricted to rows whose codeword has bit `r` set, and likewise for
//! columns. A bucket dominated by a single large entry `(i, j)` then reads,
//! bit by bit, the codewords of `i` and `j`.

mod code;

use std::collections::BTreeMap;

pub use code::{Code, CodeParams, DecoderKind};

use crate::hashing::{derive_seed, PairHash, PairHashFamily};
use crate::matrix::Operand;
use crate::sketch::{median, sketch_engine, EntryEstimate, SketchParams, SketchSet};
use crate::{Error, Exec, Result};

const ROW_CODE_DOMAIN: u64 = 0x0052_4f57;
const COL_CODE_DOMAIN: u64 = 0x0043_4f4c;

/// Default `kappa` in `Delta = kappa * sqrt(F_ub / b)`.
pub const DEFAULT_KAPPA: f64 = 40.0;

/// `kappa * sqrt(frobenius_sq_ub / buckets)`.
pub fn default_threshold(frobenius_sq_ub: f64, buckets: usize, kappa: f64) -> f64 {
    kappa * (frobenius_sq_ub / buckets as f64).sqrt()
}

/// Row and column codes for an `n1 x n3` product, seeded from `seed`.
pub fn default_codes(n1: usize, n3: usize, params: &CodeParams, seed: u64) -> Result<(Code, Code)> {
    Ok((
        Code::new(n1, params, derive_seed(seed, ROW_CODE_DOMAIN, 0))?,
        Code::new(n3, params, derive_seed(seed, COL_CODE_DOMAIN, 0))?,
    ))
}

/// Per repetition: the unmasked family, `l_r` row-masked families and `l_c`
/// column-masked families, all under the same hash functions.
#[derive(Clone, Debug, PartialEq)]
pub struct RecoverableSketch {
    dims: (usize, usize, usize),
    params: SketchParams,
    families: Vec<PairHashFamily>,
    row_code: Code,
    col_code: Code,
    coeffs: Vec<f64>,
}

pub fn compressed_product_recoverable<A: Operand, B: Operand>(
    a: &A,
    b: &B,
    params: &SketchParams,
    row_code: &Code,
    col_code: &Code,
) -> Result<RecoverableSketch> {
    compressed_product_recoverable_with(a, b, params, row_code, col_code, Exec::default())
}

pub fn compressed_product_recoverable_with<A: Operand, B: Operand>(
    a: &A,
    b: &B,
    params: &SketchParams,
    row_code: &Code,
    col_code: &Code,
    exec: Exec,
) -> Result<RecoverableSketch> {
    if row_code.n() != a.nrows() || col_code.n() != b.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "codes cover {}x{} but the product is {}x{}",
            row_code.n(),
            col_code.n(),
            a.nrows(),
            b.ncols()
        )));
    }
    let families = params.families();
    let blocks = sketch_engine(a, b, &families, row_code, col_code, exec)?;
    Ok(RecoverableSketch {
        dims: (a.nrows(), a.ncols(), b.ncols()),
        params: *params,
        families,
        row_code: row_code.clone(),
        col_code: col_code.clone(),
        coeffs: blocks.concat(),
    })
}

/// Positions that survived the majority filter, with their multiplicities.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSet {
    pub threshold: f64,
    /// `(i, j, multiplicity)` in `(i, j)` order.
    pub positions: Vec<(usize, usize, usize)>,
}

impl CandidateSet {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.positions.binary_search_by(|&(r, c, _)| (r, c).cmp(&(i, j))).is_ok()
    }
}

impl RecoverableSketch {
    pub fn from_parts(
        dims: (usize, usize, usize),
        params: SketchParams,
        row_code: Code,
        col_code: Code,
        coeffs: Vec<f64>,
    ) -> Result<Self> {
        if row_code.n() != dims.0 || col_code.n() != dims.2 {
            return Err(Error::DimensionMismatch("codes do not match the dimensions".into()));
        }
        let per_rep = (1 + row_code.len() + col_code.len()) * params.buckets();
        let want = params.reps() * per_rep;
        if coeffs.len() != want {
            return Err(Error::LengthMismatch {
                left: coeffs.len(),
                right: want,
            });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite sketch coefficient".into()));
        }
        Ok(RecoverableSketch {
            dims,
            families: params.families(),
            params,
            row_code,
            col_code,
            coeffs,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn params(&self) -> &SketchParams {
        &self.params
    }

    pub fn families(&self) -> &[PairHashFamily] {
        &self.families
    }

    pub fn row_code(&self) -> &Code {
        &self.row_code
    }

    pub fn col_code(&self) -> &Code {
        &self.col_code
    }

    /// `1 + l_r + l_c`.
    pub fn families_per_rep(&self) -> usize {
        1 + self.row_code.len() + self.col_code.len()
    }

    pub fn all_coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    fn block(&self, t: usize, f: usize) -> &[f64] {
        let b = self.params.buckets();
        let start = (t * self.families_per_rep() + f) * b;
        &self.coeffs[start..start + b]
    }

    pub fn unmasked(&self, t: usize) -> &[f64] {
        self.block(t, 0)
    }

    /// Sketch of `(I_r A) B`.
    pub fn row_family(&self, t: usize, r: usize) -> &[f64] {
        assert!(r < self.row_code.len());
        self.block(t, 1 + r)
    }

    /// Sketch of `A (B I_r)`.
    pub fn col_family(&self, t: usize, r: usize) -> &[f64] {
        assert!(r < self.col_code.len());
        self.block(t, 1 + self.row_code.len() + r)
    }

    /// The unmasked families as a plain sketch.
    pub fn to_sketch_set(&self) -> SketchSet {
        let coeffs = (0..self.params.reps()).flat_map(|t| self.unmasked(t).iter().copied()).collect();
        SketchSet::from_parts(self.dims, self.params, coeffs).expect("consistent by construction")
    }

    pub fn decompress(&self, i: usize, j: usize) -> Result<EntryEstimate> {
        let (n1, _, n3) = self.dims;
        if i >= n1 || j >= n3 {
            return Err(Error::IndexOutOfRange {
                row: i,
                col: j,
                rows: n1,
                cols: n3,
            });
        }
        let per_rep: Vec<f64> = self
            .families
            .iter()
            .enumerate()
            .map(|(t, f)| f.sign(i, j) * self.unmasked(t)[f.split(i, j)])
            .collect();
        Ok(EntryEstimate {
            value: median(&per_rep),
            per_rep,
        })
    }

    /// Adds `value` at `(i, j)` in every family whose masks keep that position.
    pub(crate) fn add_to_entry(&mut self, i: usize, j: usize, value: f64) {
        let b = self.params.buckets();
        let (lr, lc) = (self.row_code.len(), self.col_code.len());
        let fpr = self.families_per_rep();
        for (t, f) in self.families.iter().enumerate() {
            let bucket = f.split(i, j);
            let v = f.sign(i, j) * value;
            let base = t * fpr * b;
            self.coeffs[base + bucket] += v;
            for r in 0..lr {
                if self.row_code.bit(i, r) {
                    self.coeffs[base + (1 + r) * b + bucket] += v;
                }
            }
            for r in 0..lc {
                if self.col_code.bit(j, r) {
                    self.coeffs[base + (1 + lr + r) * b + bucket] += v;
                }
            }
        }
    }

    pub fn find_significant_entries(&self, delta: f64) -> Result<CandidateSet> {
        self.find_significant_entries_with(delta, Exec::default())
    }

    /// Decodes every bucket whose masked magnitudes exceed `delta / 2`
    /// somewhere and keeps positions decoded in at least half the repetitions.
    pub fn find_significant_entries_with(&self, delta: f64, exec: Exec) -> Result<CandidateSet> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("threshold {delta} must be positive")));
        }
        let d = self.params.reps();
        let b = self.params.buckets();
        let (lr, lc) = (self.row_code.len(), self.col_code.len());
        let half = delta / 2.0;
        let per_t: Vec<Vec<(usize, usize)>> = exec.map(d, |t| {
            let mut found = Vec::new();
            let mut row_word = vec![0u64; self.row_code.words_per_codeword()];
            let mut col_word = vec![0u64; self.col_code.words_per_codeword()];
            for k in 0..b {
                let signal = |f: usize| self.block(t, f)[k].abs();
                let heavy = if lr + lc == 0 {
                    signal(0) > half
                } else {
                    (1..=lr + lc).any(|f| signal(f) > half)
                };
                if !heavy {
                    continue;
                }
                row_word.fill(0);
                for r in 0..lr {
                    if signal(1 + r) > half {
                        row_word[r / 64] |= 1 << (r % 64);
                    }
                }
                col_word.fill(0);
                for r in 0..lc {
                    if signal(1 + lr + r) > half {
                        col_word[r / 64] |= 1 << (r % 64);
                    }
                }
                if let (Some(i), Some(j)) = (
                    self.row_code.decode_packed(&row_word),
                    self.col_code.decode_packed(&col_word),
                ) {
                    found.push((i, j));
                }
            }
            found
        });
        let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (i, j) in per_t.into_iter().flatten() {
            *counts.entry((i, j)).or_default() += 1;
        }
        Ok(CandidateSet {
            threshold: delta,
            positions: counts
                .into_iter()
                .filter(|&(_, c)| 2 * c >= d)
                .map(|((i, j), c)| (i, j, c))
                .collect(),
        })
    }

    /// Candidates with their estimates, dropping those whose estimate is at
    /// most `delta / 2`; sorted by decreasing magnitude, then by position.
    pub fn extract_sparse_approx(&self, delta: f64) -> Result<Vec<(usize, usize, f64)>> {
        let cands = self.find_significant_entries(delta)?;
        let mut out = Vec::with_capacity(cands.len());
        for &(i, j, _) in &cands.positions {
            let v = self.decompress(i, j)?.value;
            if v.abs() > delta / 2.0 {
                out.push((i, j, v));
            }
        }
        out.sort_by(|x, y| y.2.abs().total_cmp(&x.2.abs()).then((x.0, x.1).cmp(&(y.0, y.1))));
        Ok(out)
    }
}
