//! Compressed matrix multiplication.
//!
//! Builds Count-Sketch representations of a product `AB` without ever forming
//! `AB`. Each repetition hashes row indices of `A` and column indices of `B`
//! into `b` buckets with decomposable functions `h(i, j) = h1(i) + h2(j) mod b`
//! and `s(i, j) = s1(i) s2(j)`, so the sketch of every outer product
//! `A[:, k] B[k, :]` is a cyclic polynomial product that the FFT computes in
//! `O(b lg b)`. On top of the sketch the crate provides:
//!
//! * per-entry estimates (median of `d` repetitions) and full decompression,
//! * code-masked sketches that locate significant entries without scanning all
//!   `n1 * n3` positions ([`recovery`]),
//! * compressibility estimates: an upper bound on `nnz(AB)` that accounts for
//!   cancellation, and an upper bound on `||AB||_F^2` ([`estimate`]),
//! * sketched sample covariance matrices with the diagonal removed
//!   ([`covariance`]),
//! * exact reference oracles used by the test suites ([`reference`]).
//!
//! All indices in the library API are 0-based.
//!
//! ```
//! use cmm_core::matrix::DenseMatrix;
//! use cmm_core::sketch::{compressed_product, SketchParams};
//!
//! let a = DenseMatrix::new(1, 1, vec![2.0]).unwrap();
//! let b = DenseMatrix::new(1, 1, vec![3.0]).unwrap();
//! let params = SketchParams::new(8, 3, 42).unwrap();
//! let sketch = compressed_product(&a, &b, &params).unwrap();
//! assert!((sketch.decompress(0, 0).unwrap().value - 6.0).abs() < 1e-12);
//! ```

pub mod alloc;
pub mod covariance;
mod error;
pub mod estimate;
pub mod fft;
pub mod hashing;
pub mod matrix;
pub mod par;
pub mod recovery;
pub mod reference;
pub mod sketch;

pub use error::{Error, Result};
pub use par::Exec;
