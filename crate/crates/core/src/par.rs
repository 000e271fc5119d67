//! Data-parallel helpers. With the `parallel` feature these run on rayon;
//! without it they fall back to plain iterators. The [`sequential`] module is
//! always available so both paths can be compared in one build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length used when folding over large slices.
pub const CHUNK: usize = 1 << 14;

pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return items.par_iter().map(f).collect();
    #[cfg(not(feature = "parallel"))]
    return sequential::map_collect(items, f);
}

/// Folds each chunk into its own accumulator and merges the results.
pub fn fold_chunks<T, A, I, F, M>(items: &[T], init: I, fold: F, merge: M) -> A
where
    T: Sync,
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, &T) + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return items
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = init();
            chunk.iter().for_each(|t| fold(&mut acc, t));
            acc
        })
        .reduce(&init, &merge);
    #[cfg(not(feature = "parallel"))]
    return sequential::fold_chunks(items, init, fold, merge);
}

/// Runs `f` on a pool of `workers` threads (0 keeps the global pool).
/// Without the `parallel` feature the worker count is ignored.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        if workers > 0 {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
                return pool.install(f);
            }
        }
    }
    let _ = workers;
    f()
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

pub mod sequential {
    pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
    where
        F: Fn(&T) -> R,
    {
        items.iter().map(f).collect()
    }

    pub fn fold_chunks<T, A, I, F, M>(items: &[T], init: I, fold: F, merge: M) -> A
    where
        I: Fn() -> A,
        F: Fn(&mut A, &T),
        M: Fn(A, A) -> A,
    {
        items.chunks(super::CHUNK).fold(init(), |total, chunk| {
            let mut acc = init();
            chunk.iter().for_each(|t| fold(&mut acc, t));
            merge(total, acc)
        })
    }
}
