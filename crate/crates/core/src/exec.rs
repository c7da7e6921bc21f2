//! Deterministic data-parallel execution.
//!
//! All reductions in this crate go through a pairwise (tree) scheme whose
//! shape depends only on the input length, never on the number of worker
//! threads. With the `parallel` feature the two halves of each split run
//! on the rayon pool via `join`; without it the same recursion runs
//! sequentially. Either way the floating-point result is bit-identical,
//! so norms, residuals and certificates do not drift with `--threads`.

use std::ops::Range;

#[cfg(feature = "parallel")]
use std::sync::atomic::{AtomicBool, Ordering};

#[cfg(feature = "parallel")]
static FORCE_SEQUENTIAL: AtomicBool = AtomicBool::new(false);

/// Below this length a range is folded sequentially instead of split.
const LEAF: usize = 4096;

/// Force the sequential path at runtime even when built with `parallel`.
/// Used by the benchmark suite to compare both paths in one binary.
pub fn set_sequential(on: bool) {
    #[cfg(feature = "parallel")]
    FORCE_SEQUENTIAL.store(on, Ordering::SeqCst);
    #[cfg(not(feature = "parallel"))]
    let _ = on;
}

pub fn is_sequential() -> bool {
    #[cfg(feature = "parallel")]
    {
        FORCE_SEQUENTIAL.load(Ordering::SeqCst)
    }
    #[cfg(not(feature = "parallel"))]
    {
        true
    }
}

/// Pairwise reduction over `range` with a fixed split tree.
///
/// `leaf` folds a subrange in index order; `combine` merges the two halves
/// of a split. The tree always splits at the midpoint, so the grouping of
/// floating-point operations is reproducible.
pub fn tree_reduce<T, F, G>(range: Range<usize>, leaf: &F, combine: &G) -> T
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync,
    G: Fn(T, T) -> T + Sync,
{
    let len = range.end.saturating_sub(range.start);
    if len <= LEAF {
        return leaf(range);
    }
    let mid = range.start + len / 2;
    #[cfg(feature = "parallel")]
    {
        if !is_sequential() {
            let (a, b) = rayon::join(
                || tree_reduce(range.start..mid, leaf, combine),
                || tree_reduce(mid..range.end, leaf, combine),
            );
            return combine(a, b);
        }
    }
    let a = tree_reduce(range.start..mid, leaf, combine);
    let b = tree_reduce(mid..range.end, leaf, combine);
    combine(a, b)
}

/// Tree sum of `f(i)` for `i in 0..n`.
pub fn sum_f64<F: Fn(usize) -> f64 + Sync>(n: usize, f: F) -> f64 {
    tree_reduce(
        0..n,
        &|r: Range<usize>| {
            let mut acc = 0.0;
            for i in r {
                acc += f(i);
            }
            acc
        },
        &|a, b| a + b,
    )
}

/// Tree max of `f(i)`; empty input gives `f64::NEG_INFINITY`.
pub fn max_f64<F: Fn(usize) -> f64 + Sync>(n: usize, f: F) -> f64 {
    tree_reduce(
        0..n,
        &|r: Range<usize>| {
            let mut acc = f64::NEG_INFINITY;
            for i in r {
                acc = acc.max(f(i));
            }
            acc
        },
        &|a, b| a.max(b),
    )
}

/// Order-preserving parallel map into a `Vec`.
pub fn map_vec<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    {
        if !is_sequential() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(|i| f(i)).collect();
        }
    }
    (0..n).map(f).collect()
}

/// Run `f` on every element of disjoint, equally sized chunks in parallel.
/// Chunk `k` covers `values[k*chunk..(k+1)*chunk]`.
pub fn for_each_chunk<T, F>(values: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync,
{
    assert!(chunk > 0);
    #[cfg(feature = "parallel")]
    {
        if !is_sequential() {
            use rayon::prelude::*;
            values
                .par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(k, c)| f(k, c));
            return;
        }
    }
    for (k, c) in values.chunks_mut(chunk).enumerate() {
        f(k, c);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tree_sum_matches_sequential_fold_bitwise() {
        // Adversarial magnitudes so that grouping matters.
        let vals: Vec<f64> = (0..100_000)
            .map(|i| ((i * 2654435761usize % 1000) as f64).exp2() * 1e-30)
            .collect();
        let par = sum_f64(vals.len(), |i| vals[i]);
        set_sequential(true);
        let seq = sum_f64(vals.len(), |i| vals[i]);
        set_sequential(false);
        assert_eq!(par.to_bits(), seq.to_bits());
    }

    #[test]
    fn map_vec_preserves_order() {
        let v = map_vec(10_000, |i| i * i);
        assert!(v.iter().enumerate().all(|(i, &x)| x == i * i));
    }
}
