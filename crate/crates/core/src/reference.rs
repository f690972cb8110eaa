//! Exact, deliberately naive oracles for testing the sketches.

use crate::covariance::SampleSet;
use crate::hashing::PairHash;
use crate::matrix::{DenseMatrix, Operand};
use crate::sketch::{check_dims, DEFAULT_DENSE_CAP};
use crate::{Error, Result};

pub fn exact_product<A: Operand, B: Operand>(a: &A, b: &B) -> Result<DenseMatrix> {
    exact_product_capped(a, b, DEFAULT_DENSE_CAP)
}

/// Triple-loop `AB`, refusing when `n1 * n3 > cap`.
pub fn exact_product_capped<A: Operand, B: Operand>(a: &A, b: &B, cap: usize) -> Result<DenseMatrix> {
    check_dims(a, b)?;
    let (n1, n2, n3) = (a.nrows(), a.ncols(), b.ncols());
    let entries = n1.saturating_mul(n3);
    if entries > cap {
        return Err(Error::MemoryCap { entries, cap });
    }
    let (da, db) = (a.to_dense(), b.to_dense());
    let mut out = DenseMatrix::zeros(n1, n3);
    for i in 0..n1 {
        for j in 0..n3 {
            let mut s = 0.0;
            for k in 0..n2 {
                s += da.get(i, k) * db.get(k, j);
            }
            out.set(i, j, s);
        }
    }
    Ok(out)
}

/// Count-Sketch of the materialised product: `c_t[h(i,j)] += s(i,j) (AB)_ij`.
pub fn naive_countsketch<A: Operand, B: Operand, H: PairHash>(a: &A, b: &B, families: &[H]) -> Result<Vec<Vec<f64>>> {
    let p = exact_product(a, b)?;
    Ok(families
        .iter()
        .map(|f| {
            let mut c = vec![0.0; f.buckets()];
            for i in 0..p.rows() {
                for j in 0..p.cols() {
                    c[f.split(i, j)] += f.sign(i, j) * p.get(i, j);
                }
            }
            c
        })
        .collect())
}

/// Count-Sketch accumulated term by term over the outer products, without
/// forming `AB` or using the FFT.
pub fn outer_product_countsketch<A: Operand, B: Operand, H: PairHash>(
    a: &A,
    b: &B,
    families: &[H],
) -> Result<Vec<Vec<f64>>> {
    check_dims(a, b)?;
    let (da, db) = (a.to_dense(), b.to_dense());
    Ok(families
        .iter()
        .map(|f| {
            let mut c = vec![0.0; f.buckets()];
            for k in 0..da.cols() {
                for i in 0..da.rows() {
                    for j in 0..db.cols() {
                        c[f.split(i, j)] += f.sign(i, j) * da.get(i, k) * db.get(k, j);
                    }
                }
            }
            c
        })
        .collect())
}

/// Squared Frobenius norm of `m` without its `k` largest-magnitude entries.
pub fn err_f_k(m: &DenseMatrix, k: usize) -> f64 {
    let mut sq: Vec<f64> = m.as_slice().iter().map(|v| v * v).collect();
    sq.sort_by(|x, y| y.total_cmp(x));
    sq.iter().skip(k).sum()
}

/// `Q = 1/(m-1) sum_i (x_i - mean)(x_i - mean)^T`.
pub fn exact_covariance(s: &SampleSet) -> Result<DenseMatrix> {
    let (n, m) = (s.variables(), s.observations());
    if m < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 observations, got {m}")));
    }
    let data = s.data();
    let mean: Vec<f64> = (0..n).map(|i| (0..m).map(|o| data.get(i, o)).sum::<f64>() / m as f64).collect();
    let mut q = DenseMatrix::zeros(n, n);
    for o in 0..m {
        for i in 0..n {
            let di = data.get(i, o) - mean[i];
            for j in 0..n {
                let v = q.get(i, j) + di * (data.get(j, o) - mean[j]);
                q.set(i, j, v);
            }
        }
    }
    let scale = 1.0 / (m - 1) as f64;
    Ok(DenseMatrix::from_fn(n, n, |i, j| q.get(i, j) * scale))
}
