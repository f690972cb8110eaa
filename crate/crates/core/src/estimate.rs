//! Compressibility estimates: an upper bound on `nnz(AB)` by doubling search,
//! and an upper bound on `||AB||_F^2` from AMS sketches.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::hashing::{derive_seed, PolyHash};
use crate::matrix::{DiagonalScaling, Operand, Scaled};
use crate::sketch::{ams_product_sketch, check_dims, compressed_product_with, median, SketchParams};
use crate::{Exec, Result};

const NNZ_DOMAIN: u64 = 0x004e_4e5a;
const FROBENIUS_DOMAIN: u64 = 0x4652_4f42;

/// Default repetition count for [`estimate_nnz`].
pub const DEFAULT_NNZ_REPS: usize = 10;

/// Relative size below which a sketch coefficient counts as zero.
pub const ZERO_TOLERANCE: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct NnzEstimate {
    /// Equal to `buckets` at termination.
    pub upper_bound: usize,
    pub buckets: usize,
    /// `(b, smallest zero fraction over the repetitions)` for each level tried.
    pub zero_fractions: Vec<(usize, f64)>,
    pub reps: usize,
    /// True when the search stopped at the trivial bound `>= 2 n1 n3`.
    pub capped: bool,
    /// Per-level probability `(3/4)^d` that the bound is wrong.
    pub failure_probability: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrobeniusEstimate {
    /// Median of `X^2` over the repetitions.
    pub median_sq: f64,
    /// `32 * median_sq`.
    pub upper_bound: f64,
    pub reps: usize,
}

pub fn estimate_nnz<A: Operand, B: Operand>(a: &A, b: &B, reps: usize, seed: u64) -> Result<NnzEstimate> {
    estimate_nnz_with(a, b, reps, seed, Exec::default())
}

/// Doubles `b` from 2 until at least `4b/5` coefficients of every one of the
/// `reps` sketches of `(D_L A)(B D_R)` vanish, for random integer diagonals.
pub fn estimate_nnz_with<A: Operand, B: Operand>(
    a: &A,
    b: &B,
    reps: usize,
    seed: u64,
    exec: Exec,
) -> Result<NnzEstimate> {
    check_dims(a, b)?;
    let (n1, n3) = (a.nrows(), b.ncols());
    let dl = DiagonalScaling::random(n1, derive_seed(seed, NNZ_DOMAIN, 0));
    let dr = DiagonalScaling::random(n3, derive_seed(seed, NNZ_DOMAIN, 1));
    let sa = Scaled::new(a, Some(&dl), None)?;
    let sb = Scaled::new(b, None, Some(&dr))?;
    let tolerance = ZERO_TOLERANCE * (sa.frobenius_norm() * sb.frobenius_norm()).max(1.0);
    let cap = n1.saturating_mul(n3).saturating_mul(2).max(2).next_power_of_two();

    let mut zero_fractions = Vec::new();
    let mut buckets = 2;
    let mut level = 0u64;
    loop {
        let params = SketchParams::new(buckets, reps, derive_seed(seed, NNZ_DOMAIN, 2 + level))?;
        let sketch = compressed_product_with(&sa, &sb, &params, exec)?;
        let worst = (0..reps)
            .map(|t| sketch.coefficients(t).iter().filter(|c| c.abs() <= tolerance).count())
            .min()
            .unwrap_or(0);
        zero_fractions.push((buckets, worst as f64 / buckets as f64));
        let done = 5 * worst >= 4 * buckets;
        if done || buckets >= cap {
            return Ok(NnzEstimate {
                upper_bound: buckets,
                buckets,
                zero_fractions,
                reps,
                capped: !done,
                failure_probability: 0.75f64.powi(reps as i32),
                tolerance,
            });
        }
        buckets *= 2;
        level += 1;
    }
}

/// Signs used by repetition `t` of [`estimate_frobenius_ub`].
pub fn frobenius_signs(seed: u64, t: usize) -> (PolyHash, PolyHash) {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, FROBENIUS_DOMAIN, t as u64));
    let s1 = PolyHash::random(4, &mut rng);
    let s2 = PolyHash::random(4, &mut rng);
    (s1, s2)
}

pub fn estimate_frobenius_ub<A: Operand, B: Operand>(a: &A, b: &B, reps: usize, seed: u64) -> Result<FrobeniusEstimate> {
    estimate_frobenius_ub_with(a, b, reps, seed, Exec::default())
}

/// Median of `X^2` for `reps` AMS sketches `X` of `AB` with 4-wise
/// independent signs, and 32 times that.
pub fn estimate_frobenius_ub_with<A: Operand, B: Operand>(
    a: &A,
    b: &B,
    reps: usize,
    seed: u64,
    exec: Exec,
) -> Result<FrobeniusEstimate> {
    check_dims(a, b)?;
    if reps == 0 {
        return Err(crate::Error::InvalidParameter("need at least one repetition".into()));
    }
    let squares: Vec<f64> = exec
        .map(reps, |t| {
            let (s1, s2) = frobenius_signs(seed, t);
            ams_product_sketch(a, b, &s1, &s2).map(|x| x * x)
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let median_sq = median(&squares);
    Ok(FrobeniusEstimate {
        median_sq,
        upper_bound: 32.0 * median_sq,
        reps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{DenseMatrix, Layout, SparseMatrix};
    use crate::reference::exact_product;
    use rand::Rng;

    fn diagonal(n: usize, k: usize) -> SparseMatrix {
        SparseMatrix::from_triplets(n, n, (0..k).map(|i| (i, i, 1.0 + i as f64)), Layout::ColumnMajor).unwrap()
    }

    #[test]
    fn full_cancellation_stops_at_two() {
        // A = [u u], B = [v; -v]: every outer product is dense, the sum is 0.
        let n = 8;
        let a = DenseMatrix::from_fn(n, 2, |i, _| 1.0 + i as f64);
        let b = DenseMatrix::from_fn(2, n, |k, j| if k == 0 { 1.0 + j as f64 } else { -1.0 - j as f64 });
        assert_eq!(exact_product(&a, &b).unwrap(), DenseMatrix::zeros(n, n));
        for seed in 0..10 {
            let e = estimate_nnz(&a, &b, 10, seed).unwrap();
            assert_eq!(e.upper_bound, 2);
            assert!(!e.capped);
        }
        let ones = DenseMatrix::from_fn(2, 2, |_, _| 1.0);
        let b2 = DenseMatrix::new(2, 2, vec![1.0, -1.0, -1.0, 1.0]).unwrap();
        assert_eq!(estimate_nnz(&ones, &b2, 10, 3).unwrap().upper_bound, 2);
    }

    #[test]
    fn one_by_one_identity() {
        let i = DenseMatrix::identity(1);
        let e = estimate_nnz(&i, &i, 10, 0).unwrap();
        assert_eq!(e.upper_bound, 2);
        assert!(e.capped);
    }

    #[test]
    fn diagonal_eight_in_range() {
        let a = diagonal(32, 8);
        let id = DenseMatrix::identity(32);
        for seed in 0..100 {
            let e = estimate_nnz(&a, &id, 10, seed).unwrap();
            assert!((8..=80).contains(&e.upper_bound), "seed {seed}: {}", e.upper_bound);
            assert_eq!(e.upper_bound, e.buckets);
            let last = e.zero_fractions.last().unwrap();
            assert!(last.1 >= 0.8);
        }
    }

    #[test]
    fn sound_on_random_sparse_products() {
        let n = 32;
        let mut fails = 0;
        for trial in 0..200u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(trial);
            let trip: Vec<_> = (0..40)
                .map(|_| (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(-3..=3) as f64))
                .collect();
            let a = SparseMatrix::from_triplets(n, n, trip, Layout::ColumnMajor).unwrap();
            let b = SparseMatrix::from_triplets(
                n,
                n,
                (0..n).map(|i| (i, (i * 7) % n, 1.0)),
                Layout::RowMajor,
            )
            .unwrap();
            let nnz = exact_product(&a, &b).unwrap().nnz();
            if estimate_nnz(&a, &b, 10, trial).unwrap().upper_bound < nnz {
                fails += 1;
            }
        }
        // (3/4)^10 ~ 0.056 per level; in practice far lower.
        assert!(fails as f64 <= 0.0563 * 200.0, "{fails}");
    }

    #[test]
    fn permutation_invariant_in_distribution() {
        let n = 16;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = DenseMatrix::from_fn(n, n, |_, _| if rng.random_bool(0.1) { 1.0 } else { 0.0 });
        let b = DenseMatrix::from_fn(n, n, |_, _| if rng.random_bool(0.1) { 1.0 } else { 0.0 });
        let perm: Vec<usize> = (0..n).rev().collect();
        let ap = DenseMatrix::from_fn(n, n, |i, k| a.get(i, perm[k]));
        let bp = DenseMatrix::from_fn(n, n, |k, j| b.get(perm[k], j));
        let mut h1 = std::collections::BTreeMap::new();
        let mut h2 = std::collections::BTreeMap::new();
        for seed in 0..100 {
            *h1.entry(estimate_nnz(&a, &b, 10, seed).unwrap().upper_bound).or_insert(0) += 1;
            *h2.entry(estimate_nnz(&ap, &bp, 10, seed).unwrap().upper_bound).or_insert(0) += 1;
        }
        // Same product, same seeds: the sketches coincide up to rounding.
        assert_eq!(h1, h2);
    }

    #[test]
    fn frobenius_trivial_cases() {
        let z = DenseMatrix::zeros(4, 4);
        let e = estimate_frobenius_ub(&z, &z, 5, 1).unwrap();
        assert_eq!((e.median_sq, e.upper_bound), (0.0, 0.0));

        let a = SparseMatrix::from_triplets(5, 5, vec![(2, 3, 3.0)], Layout::ColumnMajor).unwrap();
        let b = DenseMatrix::identity(5);
        let e = estimate_frobenius_ub(&a, &b, 7, 2).unwrap();
        assert_eq!(e.median_sq, 9.0);
        assert_eq!(e.upper_bound, 288.0);
    }

    #[test]
    fn frobenius_bound_holds_on_random() {
        let mut within = 0;
        let mut covers = 0;
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = DenseMatrix::from_fn(16, 16, |_, _| rng.random_range(-1.0..1.0));
            let b = DenseMatrix::from_fn(16, 16, |_, _| rng.random_range(-1.0..1.0));
            let f2 = exact_product(&a, &b).unwrap().frobenius_norm().powi(2);
            let e = estimate_frobenius_ub(&a, &b, 25, seed).unwrap();
            if e.median_sq >= f2 / 32.0 && e.median_sq <= 32.0 * f2 {
                within += 1;
            }
            if e.upper_bound >= f2 {
                covers += 1;
            }
        }
        assert!(within >= 95 && covers >= 95, "{within} {covers}");
    }

    #[test]
    fn second_moment_is_unbiased() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let a = DenseMatrix::from_fn(16, 16, |_, _| rng.random_range(-1.0..1.0));
        let b = DenseMatrix::from_fn(16, 16, |_, _| rng.random_range(-1.0..1.0));
        let f2 = exact_product(&a, &b).unwrap().frobenius_norm().powi(2);
        let xs: Vec<f64> = (0..5000)
            .map(|s| estimate_frobenius_ub(&a, &b, 1, s).unwrap().median_sq)
            .collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
        let se = (var / xs.len() as f64).sqrt();
        assert!((mean - f2).abs() <= 4.0 * se, "{mean} vs {f2} (se {se})");
    }
}
