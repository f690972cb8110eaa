//! Dense and sparse matrix containers.
//!
//! The sketch engine only needs two access patterns: the nonzeros of a column
//! of `A` and the nonzeros of a row of `B`. Both are expressed by the
//! [`Operand`] trait, which dense matrices, sparse matrices in either layout and
//! the lightweight [`Transposed`] / [`Scaled`] views implement.

mod market;

pub use market::{load_matrix_market, read_matrix_market, write_matrix_market, MarketFormat};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Read-only access to a matrix by columns and by rows.
///
/// Implementations visit only stored/nonzero entries; callers must not rely on
/// visiting order beyond "ascending index within the line" where the
/// implementation documents it.
pub trait Operand: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;

    /// Calls `f(row, value)` for every nonzero in column `k`.
    fn for_each_in_column<F: FnMut(usize, f64)>(&self, k: usize, f: F);

    /// Calls `f(col, value)` for every nonzero in row `k`.
    fn for_each_in_row<F: FnMut(usize, f64)>(&self, k: usize, f: F);

    fn frobenius_norm(&self) -> f64 {
        let mut sum = 0.0;
        for r in 0..self.nrows() {
            self.for_each_in_row(r, |_, v| sum += v * v);
        }
        sum.sqrt()
    }

    fn nnz(&self) -> usize {
        let mut count = 0;
        for r in 0..self.nrows() {
            self.for_each_in_row(r, |_, _| count += 1);
        }
        count
    }

    fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.nrows(), self.ncols());
        for r in 0..self.nrows() {
            self.for_each_in_row(r, |c, v| out.data[r * out.cols + c] = v);
        }
        out
    }
}

impl<M: Operand> Operand for &M {
    fn nrows(&self) -> usize {
        (**self).nrows()
    }
    fn ncols(&self) -> usize {
        (**self).ncols()
    }
    fn for_each_in_column<F: FnMut(usize, f64)>(&self, k: usize, f: F) {
        (**self).for_each_in_column(k, f)
    }
    fn for_each_in_row<F: FnMut(usize, f64)>(&self, k: usize, f: F) {
        (**self).for_each_in_row(k, f)
    }
}

/// Row-major dense matrix of finite `f64` values.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        let expected = rows
            .checked_mul(cols)
            .ok_or_else(|| Error::InvalidMatrix(format!("{rows}x{cols} overflows")))?;
        if data.len() != expected {
            return Err(Error::InvalidMatrix(format!(
                "{rows}x{cols} matrix needs {expected} values, got {}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite value at ({}, {})",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from `f(row, col)`. Panics if `f` returns a non-finite value.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                let v = f(r, c);
                assert!(v.is_finite(), "non-finite value at ({r}, {c})");
                data.push(v);
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    /// Panics on a non-finite value.
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        assert!(v.is_finite());
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_sparse(&self, layout: Layout) -> SparseMatrix {
        let triplets = (0..self.rows)
            .flat_map(|r| (0..self.cols).map(move |c| (r, c)))
            .map(|(r, c)| (r, c, self.get(r, c)));
        SparseMatrix::from_triplets(self.rows, self.cols, triplets, layout)
            .expect("dense entries are in range and finite")
    }
}

impl Operand for DenseMatrix {
    fn nrows(&self) -> usize {
        self.rows
    }
    fn ncols(&self) -> usize {
        self.cols
    }
    fn for_each_in_column<F: FnMut(usize, f64)>(&self, k: usize, mut f: F) {
        for r in 0..self.rows {
            let v = self.data[r * self.cols + k];
            if v != 0.0 {
                f(r, v);
            }
        }
    }
    fn for_each_in_row<F: FnMut(usize, f64)>(&self, k: usize, mut f: F) {
        for (c, &v) in self.row(k).iter().enumerate() {
            if v != 0.0 {
                f(c, v);
            }
        }
    }
    fn to_dense(&self) -> DenseMatrix {
        self.clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Layout {
    /// Compressed sparse columns: lines are columns.
    ColumnMajor,
    /// Compressed sparse rows: lines are rows.
    RowMajor,
}

/// Compressed sparse matrix (CSC or CSR depending on `layout`).
///
/// Within each line indices are strictly increasing and no stored value is 0.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    layout: Layout,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` triplets. Duplicates are summed
    /// and entries that end up exactly zero are dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
        layout: Layout,
    ) -> Result<Self> {
        let mut items: Vec<(usize, usize, f64)> = Vec::new();
        for (r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(Error::IndexOutOfRange {
                    row: r,
                    col: c,
                    rows,
                    cols,
                });
            }
            if !v.is_finite() {
                return Err(Error::InvalidMatrix(format!("non-finite value at ({r}, {c})")));
            }
            let (line, idx) = match layout {
                Layout::ColumnMajor => (c, r),
                Layout::RowMajor => (r, c),
            };
            items.push((line, idx, v));
        }
        items.sort_unstable_by_key(|&(line, idx, _)| (line, idx));

        let lines = match layout {
            Layout::ColumnMajor => cols,
            Layout::RowMajor => rows,
        };
        let mut offsets = vec![0usize; lines + 1];
        let mut indices = Vec::with_capacity(items.len());
        let mut values = Vec::with_capacity(items.len());
        let mut iter = items.into_iter().peekable();
        while let Some((line, idx, mut v)) = iter.next() {
            while let Some(&(l2, i2, v2)) = iter.peek() {
                if (l2, i2) != (line, idx) {
                    break;
                }
                v += v2;
                iter.next();
            }
            if v != 0.0 {
                indices.push(idx);
                values.push(v);
                offsets[line + 1] += 1;
            }
        }
        for l in 0..lines {
            offsets[l + 1] += offsets[l];
        }
        Ok(SparseMatrix {
            rows,
            cols,
            layout,
            offsets,
            indices,
            values,
        })
    }

    pub fn zeros(rows: usize, cols: usize, layout: Layout) -> Self {
        Self::from_triplets(rows, cols, std::iter::empty(), layout).expect("empty is valid")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn stored(&self) -> usize {
        self.values.len()
    }

    /// Indices and values of line `l` (a column in column-major layout, a row
    /// in row-major layout).
    pub fn line(&self, l: usize) -> (&[usize], &[f64]) {
        let range = self.offsets[l]..self.offsets[l + 1];
        (&self.indices[range.clone()], &self.values[range])
    }

    /// All entries as `(row, col, value)`, ordered by line then index.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let lines = self.offsets.len() - 1;
        let mut out = Vec::with_capacity(self.stored());
        for l in 0..lines {
            let (idx, vals) = self.line(l);
            for (&i, &v) in idx.iter().zip(vals) {
                out.push(match self.layout {
                    Layout::ColumnMajor => (i, l, v),
                    Layout::RowMajor => (l, i, v),
                });
            }
        }
        out
    }

    pub fn to_layout(&self, layout: Layout) -> SparseMatrix {
        if layout == self.layout {
            return self.clone();
        }
        Self::from_triplets(self.rows, self.cols, self.triplets(), layout)
            .expect("entries of a valid matrix stay valid")
    }

    pub fn transpose(&self) -> SparseMatrix {
        // Reinterpreting the lines flips the layout, and is exact.
        SparseMatrix {
            rows: self.cols,
            cols: self.rows,
            layout: match self.layout {
                Layout::ColumnMajor => Layout::RowMajor,
                Layout::RowMajor => Layout::ColumnMajor,
            },
            offsets: self.offsets.clone(),
            indices: self.indices.clone(),
            values: self.values.clone(),
        }
    }

    // Entry lookup in a line by binary search, for the cross-layout access path.
    fn lookup(&self, line: usize, idx: usize) -> Option<f64> {
        let (indices, values) = self.line(line);
        indices.binary_search(&idx).ok().map(|p| values[p])
    }
}

impl Operand for SparseMatrix {
    fn nrows(&self) -> usize {
        self.rows
    }
    fn ncols(&self) -> usize {
        self.cols
    }

    /// Linear in the column's nonzeros for column-major storage. For row-major
    /// storage every row is binary searched.
    fn for_each_in_column<F: FnMut(usize, f64)>(&self, k: usize, mut f: F) {
        match self.layout {
            Layout::ColumnMajor => {
                let (idx, vals) = self.line(k);
                idx.iter().zip(vals).for_each(|(&i, &v)| f(i, v));
            }
            Layout::RowMajor => {
                for r in 0..self.rows {
                    if let Some(v) = self.lookup(r, k) {
                        f(r, v);
                    }
                }
            }
        }
    }

    fn for_each_in_row<F: FnMut(usize, f64)>(&self, k: usize, mut f: F) {
        match self.layout {
            Layout::RowMajor => {
                let (idx, vals) = self.line(k);
                idx.iter().zip(vals).for_each(|(&i, &v)| f(i, v));
            }
            Layout::ColumnMajor => {
                for c in 0..self.cols {
                    if let Some(v) = self.lookup(c, k) {
                        f(c, v);
                    }
                }
            }
        }
    }

    fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn nnz(&self) -> usize {
        self.stored()
    }
}

/// Either storage kind, as loaded from a file.
#[derive(Clone, Debug, PartialEq)]
pub enum Matrix {
    Dense(DenseMatrix),
    Sparse(SparseMatrix),
}

impl Operand for Matrix {
    fn nrows(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.nrows(),
            Matrix::Sparse(m) => m.nrows(),
        }
    }
    fn ncols(&self) -> usize {
        match self {
            Matrix::Dense(m) => m.ncols(),
            Matrix::Sparse(m) => m.ncols(),
        }
    }
    fn for_each_in_column<F: FnMut(usize, f64)>(&self, k: usize, f: F) {
        match self {
            Matrix::Dense(m) => m.for_each_in_column(k, f),
            Matrix::Sparse(m) => m.for_each_in_column(k, f),
        }
    }
    fn for_each_in_row<F: FnMut(usize, f64)>(&self, k: usize, f: F) {
        match self {
            Matrix::Dense(m) => m.for_each_in_row(k, f),
            Matrix::Sparse(m) => m.for_each_in_row(k, f),
        }
    }
    fn frobenius_norm(&self) -> f64 {
        match self {
            Matrix::Dense(m) => m.frobenius_norm(),
            Matrix::Sparse(m) => m.frobenius_norm(),
        }
    }
}

/// Transposed view of an operand; nothing is copied.
#[derive(Clone, Copy, Debug)]
pub struct Transposed<M>(pub M);

impl<M: Operand> Operand for Transposed<M> {
    fn nrows(&self) -> usize {
        self.0.ncols()
    }
    fn ncols(&self) -> usize {
        self.0.nrows()
    }
    fn for_each_in_column<F: FnMut(usize, f64)>(&self, k: usize, f: F) {
        self.0.for_each_in_row(k, f)
    }
    fn for_each_in_row<F: FnMut(usize, f64)>(&self, k: usize, f: F) {
        self.0.for_each_in_column(k, f)
    }
}

/// Diagonal matrix with nonzero entries.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalScaling {
    entries: Vec<f64>,
}

/// Largest value drawn by [`DiagonalScaling::random`]: `2^31 - 1`.
pub const MAX_DIAGONAL_ENTRY: u64 = (1 << 31) - 1;

impl DiagonalScaling {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().any(|&v| v == 0.0 || !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "diagonal entries must be finite and nonzero".into(),
            ));
        }
        Ok(DiagonalScaling { entries })
    }

    /// Entries drawn independently and uniformly from `{1, ..., 2^31 - 1}`.
    pub fn random(len: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let entries = (0..len)
            .map(|_| rng.random_range(1..=MAX_DIAGONAL_ENTRY) as f64)
            .collect();
        DiagonalScaling { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// `D * M`: row `i` of `m` scaled by entry `i`.
    pub fn apply_left<M: DiagonalScale>(&self, m: &M) -> Result<M> {
        m.scale_rows(self)
    }

    /// `M * D`: column `j` of `m` scaled by entry `j`.
    pub fn apply_right<M: DiagonalScale>(&self, m: &M) -> Result<M> {
        m.scale_cols(self)
    }
}

pub trait DiagonalScale: Sized {
    fn scale_rows(&self, d: &DiagonalScaling) -> Result<Self>;
    fn scale_cols(&self, d: &DiagonalScaling) -> Result<Self>;
}

fn check_len(d: &DiagonalScaling, n: usize, what: &str) -> Result<()> {
    if d.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "diagonal of length {} cannot scale {n} {what}",
            d.len()
        )));
    }
    Ok(())
}

impl DiagonalScale for DenseMatrix {
    fn scale_rows(&self, d: &DiagonalScaling) -> Result<Self> {
        check_len(d, self.rows, "rows")?;
        Ok(DenseMatrix::from_fn(self.rows, self.cols, |r, c| {
            d.entries[r] * self.get(r, c)
        }))
    }
    fn scale_cols(&self, d: &DiagonalScaling) -> Result<Self> {
        check_len(d, self.cols, "columns")?;
        Ok(DenseMatrix::from_fn(self.rows, self.cols, |r, c| {
            self.get(r, c) * d.entries[c]
        }))
    }
}

impl DiagonalScale for SparseMatrix {
    fn scale_rows(&self, d: &DiagonalScaling) -> Result<Self> {
        check_len(d, self.rows, "rows")?;
        let t = self.triplets().into_iter().map(|(r, c, v)| (r, c, d.entries[r] * v));
        SparseMatrix::from_triplets(self.rows, self.cols, t, self.layout)
    }
    fn scale_cols(&self, d: &DiagonalScaling) -> Result<Self> {
        check_len(d, self.cols, "columns")?;
        let t = self.triplets().into_iter().map(|(r, c, v)| (r, c, v * d.entries[c]));
        SparseMatrix::from_triplets(self.rows, self.cols, t, self.layout)
    }
}

/// `left * M * right` as a view, without copying `M`.
#[derive(Clone, Copy, Debug)]
pub struct Scaled<'a, M> {
    inner: &'a M,
    left: Option<&'a DiagonalScaling>,
    right: Option<&'a DiagonalScaling>,
}

impl<'a, M: Operand> Scaled<'a, M> {
    pub fn new(
        inner: &'a M,
        left: Option<&'a DiagonalScaling>,
        right: Option<&'a DiagonalScaling>,
    ) -> Result<Self> {
        if let Some(d) = left {
            check_len(d, inner.nrows(), "rows")?;
        }
        if let Some(d) = right {
            check_len(d, inner.ncols(), "columns")?;
        }
        Ok(Scaled { inner, left, right })
    }

    fn factor(&self, r: usize, c: usize) -> f64 {
        let l = self.left.map_or(1.0, |d| d.entries[r]);
        let rt = self.right.map_or(1.0, |d| d.entries[c]);
        l * rt
    }
}

impl<M: Operand> Operand for Scaled<'_, M> {
    fn nrows(&self) -> usize {
        self.inner.nrows()
    }
    fn ncols(&self) -> usize {
        self.inner.ncols()
    }
    fn for_each_in_column<F: FnMut(usize, f64)>(&self, k: usize, mut f: F) {
        self.inner
            .for_each_in_column(k, |r, v| f(r, self.factor(r, k) * v));
    }
    fn for_each_in_row<F: FnMut(usize, f64)>(&self, k: usize, mut f: F) {
        self.inner
            .for_each_in_row(k, |c, v| f(c, self.factor(k, c) * v));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use std::collections::BTreeSet;

    fn random_sparse(rows: usize, cols: usize, nnz: usize, seed: u64, layout: Layout) -> SparseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t: Vec<_> = (0..nnz)
            .map(|_| {
                (
                    rng.random_range(0..rows),
                    rng.random_range(0..cols),
                    rng.random_range(-5..=5) as f64 + 0.5,
                )
            })
            .collect();
        SparseMatrix::from_triplets(rows, cols, t, layout).unwrap()
    }

    fn triplet_set(m: &SparseMatrix) -> BTreeSet<(usize, usize, u64)> {
        m.triplets().into_iter().map(|(r, c, v)| (r, c, v.to_bits())).collect()
    }

    #[test]
    fn dense_rejects_bad_input() {
        assert!(DenseMatrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(DenseMatrix::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(DenseMatrix::new(1, 1, vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn triplets_drop_zeros_and_sum_duplicates() {
        let m = SparseMatrix::from_triplets(
            2,
            2,
            vec![(0, 0, 1.0), (0, 0, 2.0), (1, 1, 0.0), (1, 0, 4.0), (1, 0, -4.0)],
            Layout::ColumnMajor,
        )
        .unwrap();
        assert_eq!(m.triplets(), vec![(0, 0, 3.0)]);
    }

    #[test]
    fn triplet_out_of_range() {
        let err = SparseMatrix::from_triplets(3, 3, vec![(3, 0, 1.0)], Layout::RowMajor);
        assert!(matches!(err, Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn layout_roundtrip_and_small_cases() {
        let one = SparseMatrix::from_triplets(1, 1, vec![(0, 0, 7.0)], Layout::ColumnMajor).unwrap();
        assert_eq!(one.to_layout(Layout::ColumnMajor), one);
        assert_eq!(one.to_layout(Layout::RowMajor).triplets(), one.triplets());

        let m = random_sparse(8, 8, 20, 3, Layout::ColumnMajor);
        let r = m.to_layout(Layout::RowMajor);
        assert_eq!(triplet_set(&m), triplet_set(&r));
        assert_eq!(r.to_layout(Layout::ColumnMajor), m);
    }

    #[test]
    fn cross_layout_access_matches_dense() {
        let m = random_sparse(6, 9, 25, 11, Layout::RowMajor);
        let d = m.to_dense();
        for layout in [Layout::RowMajor, Layout::ColumnMajor] {
            let s = m.to_layout(layout);
            for k in 0..9 {
                let mut got = vec![];
                s.for_each_in_column(k, |r, v| got.push((r, v)));
                let mut want = vec![];
                d.for_each_in_column(k, |r, v| want.push((r, v)));
                assert_eq!(got, want);
            }
            for k in 0..6 {
                let mut got = vec![];
                s.for_each_in_row(k, |c, v| got.push((c, v)));
                let mut want = vec![];
                d.for_each_in_row(k, |c, v| want.push((c, v)));
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn transpose_views_agree() {
        let m = random_sparse(4, 7, 12, 5, Layout::ColumnMajor);
        let t1 = m.transpose().to_dense();
        let t2 = Transposed(&m).to_dense();
        let t3 = m.to_dense().transpose();
        assert_eq!(t1, t3);
        assert_eq!(t2, t3);
    }

    #[test]
    fn random_diagonal_properties() {
        let d = DiagonalScaling::random(3, 9);
        assert_eq!(d.len(), 3);
        assert!(d.entries().iter().all(|&v| v != 0.0));
        assert_eq!(DiagonalScaling::random(3, 9), d);

        let big = DiagonalScaling::random(10_000, 1);
        let min = big.entries().iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min > 0.0);
        assert!(big.entries().iter().all(|&v| v <= MAX_DIAGONAL_ENTRY as f64 && v.fract() == 0.0));
    }

    #[test]
    fn diagonal_scaling_matches_naive_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let m = DenseMatrix::from_fn(5, 5, |_, _| rng.random_range(-3.0..3.0));
        let dl = DiagonalScaling::random(5, 1);
        let dr = DiagonalScaling::random(5, 2);
        let left = dl.apply_left(&m).unwrap();
        let right = dr.apply_right(&m).unwrap();
        for r in 0..5 {
            for c in 0..5 {
                assert_eq!(left.get(r, c), dl.entries()[r] * m.get(r, c));
                assert_eq!(right.get(r, c), m.get(r, c) * dr.entries()[c]);
            }
        }
        let view = Scaled::new(&m, Some(&dl), Some(&dr)).unwrap().to_dense();
        let explicit = dr.apply_right(&left).unwrap();
        for (x, y) in view.as_slice().iter().zip(explicit.as_slice()) {
            assert!((x - y).abs() <= 1e-15 * y.abs());
        }
    }

    #[test]
    fn diagonal_identity_and_zero() {
        let m = random_sparse(4, 4, 6, 8, Layout::RowMajor);
        let ones = DiagonalScaling::new(vec![1.0; 4]).unwrap();
        assert_eq!(ones.apply_left(&m).unwrap(), m);
        let z = DenseMatrix::zeros(4, 4);
        assert_eq!(DiagonalScaling::random(4, 3).apply_right(&z).unwrap(), z);
        assert!(DiagonalScaling::new(vec![1.0, 0.0]).is_err());
        assert!(matches!(
            DiagonalScaling::random(3, 0).apply_left(&m),
            Err(Error::DimensionMismatch(_))
        ));
    }

    proptest! {
        #[test]
        fn layout_conversion_preserves_triplets(
            rows in 1usize..12, cols in 1usize..12, nnz in 0usize..40, seed in any::<u64>()
        ) {
            let m = random_sparse(rows, cols, nnz, seed, Layout::ColumnMajor);
            let r = m.to_layout(Layout::RowMajor);
            prop_assert_eq!(triplet_set(&m), triplet_set(&r));
            prop_assert_eq!(r.to_layout(Layout::ColumnMajor), m);
        }

        #[test]
        fn scaling_preserves_pattern(seed in any::<u64>()) {
            let m = random_sparse(6, 6, 14, seed, Layout::ColumnMajor);
            let d = DiagonalScaling::random(6, seed ^ 1);
            let s = d.apply_left(&m).unwrap();
            let pattern = |x: &SparseMatrix| x.triplets().into_iter().map(|(r, c, _)| (r, c)).collect::<Vec<_>>();
            prop_assert_eq!(pattern(&m), pattern(&s));
        }
    }
}
