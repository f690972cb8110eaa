//! Execution policy for the data-parallel loops.
//!
//! Every parallel loop in the crate runs over independent work items
//! (repetitions, Monte Carlo trials, output rows) and collects results in
//! index order, so `Exec::Parallel` and `Exec::Sequential` produce bitwise
//! identical results. Without the `parallel` feature, `Exec::Parallel` falls
//! back to the sequential path.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// True when this policy will actually fan out to the rayon pool.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Maps `f` over `0..count`, returning results in index order.
    pub fn map<T, F>(self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            return (0..count).into_par_iter().map(f).collect();
        }
        (0..count).map(f).collect()
    }

    /// Applies `f` to each `chunk`-sized piece of `data`, in parallel when
    /// enabled. The chunk index is passed alongside the slice.
    pub fn for_each_chunk_mut<T, F>(self, data: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        if chunk == 0 {
            return;
        }
        #[cfg(feature = "parallel")]
        if self == Exec::Parallel {
            data.par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(idx, c)| f(idx, c));
            return;
        }
        data.chunks_mut(chunk)
            .enumerate()
            .for_each(|(idx, c)| f(idx, c));
    }
}
