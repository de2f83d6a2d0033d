//! Execution-mode plumbing for data-parallel scans.
//!
//! Every batch operation in this crate (jacobiator sweeps, residual scans,
//! spectral mode loops) is expressed through the helpers here. With the
//! `parallel` feature (default) they dispatch to rayon; without it, or with
//! [`ExecMode::Sequential`], they run on the calling thread. Results are
//! always combined in index order, so outputs are bitwise identical across
//! modes and thread counts.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk size for grid-sized mode loops; large enough to amortize task
/// dispatch, small enough to load-balance a 32³ grid.
pub(crate) const MODE_CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    /// Run on the calling thread.
    Sequential,
    /// Use the rayon thread pool. Without the `parallel` feature this
    /// silently degrades to sequential execution.
    #[default]
    Parallel,
}

impl ExecMode {
    fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

/// Map `f` over `items`, preserving order.
pub fn map_collect<T, U, F>(mode: ExecMode, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// Map a fallible `f` over `items`, preserving order and returning the first
/// error in index order.
pub fn try_map_collect<T, U, F>(mode: ExecMode, items: &[T], f: F) -> crate::Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> crate::Result<U> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// Map `f` over index range `0..n`, preserving order.
pub fn map_indices<U, F>(mode: ExecMode, n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..n).map(f).collect()
}

/// Process disjoint chunks of `data` in place. `f` receives the chunk and the
/// flat offset of its first element.
pub fn for_each_chunk_mut<T, F>(mode: ExecMode, data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i * chunk, c));
        return;
    }
    let _ = mode;
    data.chunks_mut(chunk)
        .enumerate()
        .for_each(|(i, c)| f(i * chunk, c));
}

/// Process disjoint chunks of `data` in place and combine one accumulator per
/// chunk. Accumulators are reduced sequentially in chunk order, which keeps
/// floating-point sums independent of the thread schedule.
pub fn fold_chunks_mut<T, A, F, G>(
    mode: ExecMode,
    data: &mut [T],
    chunk: usize,
    f: F,
    combine: G,
    init: A,
) -> A
where
    T: Send,
    A: Send,
    F: Fn(usize, &mut [T]) -> A + Sync + Send,
    G: Fn(A, A) -> A,
{
    let partials: Vec<A>;
    #[cfg(feature = "parallel")]
    {
        if mode.is_parallel() {
            partials = data
                .par_chunks_mut(chunk)
                .enumerate()
                .map(|(i, c)| f(i * chunk, c))
                .collect();
            return partials.into_iter().fold(init, combine);
        }
    }
    let _ = mode;
    partials = data
        .chunks_mut(chunk)
        .enumerate()
        .map(|(i, c)| f(i * chunk, c))
        .collect();
    partials.into_iter().fold(init, combine)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_collect_matches_sequential() {
        let items: Vec<f64> = (0..1000).map(|i| i as f64 * 0.25).collect();
        let seq = map_collect(ExecMode::Sequential, &items, |x| x.sin());
        let par = map_collect(ExecMode::Parallel, &items, |x| x.sin());
        assert_eq!(seq, par);
    }

    #[test]
    fn fold_chunks_is_schedule_independent() {
        let mut a: Vec<f64> = (0..10_000).map(|i| (i as f64).cos()).collect();
        let mut b = a.clone();
        let sum = |_: usize, c: &mut [f64]| c.iter().map(|x| x * x).sum::<f64>();
        let s1 = fold_chunks_mut(ExecMode::Sequential, &mut a, 128, sum, |x, y| x + y, 0.0);
        let s2 = fold_chunks_mut(ExecMode::Parallel, &mut b, 128, sum, |x, y| x + y, 0.0);
        assert_eq!(s1.to_bits(), s2.to_bits());
    }
}
