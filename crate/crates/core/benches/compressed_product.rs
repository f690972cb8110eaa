//! Sequential versus data-parallel sketch construction.

use std::hint::black_box;

use cmm_core::matrix::{Layout, SparseMatrix};
use cmm_core::recovery::{compressed_product_recoverable_with, default_codes, CodeParams};
use cmm_core::sketch::{compressed_product_with, SketchParams};
use cmm_core::Exec;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_sparse(n: usize, nnz: usize, layout: Layout, seed: u64) -> SparseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let trip: Vec<_> = (0..nnz)
        .map(|_| (rng.random_range(0..n), rng.random_range(0..n), rng.random_range(-1.0..1.0)))
        .collect();
    SparseMatrix::from_triplets(n, n, trip, layout).unwrap()
}

fn plain(c: &mut Criterion) {
    let a = random_sparse(512, 2048, Layout::ColumnMajor, 1);
    let b = random_sparse(512, 2048, Layout::RowMajor, 2);
    let mut group = c.benchmark_group("compressed_product");
    group.sample_size(10);
    for buckets in [1024usize, 4096] {
        let params = SketchParams::new(buckets, 8, 7).unwrap();
        for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
            group.bench_with_input(BenchmarkId::new(name, buckets), &params, |bench, p| {
                bench.iter(|| black_box(compressed_product_with(&a, &b, p, exec).unwrap()))
            });
        }
    }
    group.finish();
}

fn recoverable(c: &mut Criterion) {
    let n = 128;
    let a = random_sparse(n, 1024, Layout::ColumnMajor, 3);
    let b = random_sparse(n, 1024, Layout::RowMajor, 4);
    let params = SketchParams::new(512, 6, 7).unwrap();
    let (rc, cc) = default_codes(n, n, &CodeParams::default(), 7).unwrap();
    let mut group = c.benchmark_group("compressed_product_recoverable");
    group.sample_size(10);
    for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
        group.bench_function(name, |bench| {
            bench.iter(|| black_box(compressed_product_recoverable_with(&a, &b, &params, &rc, &cc, exec).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, plain, recoverable);
criterion_main!(benches);
