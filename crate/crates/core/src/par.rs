//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature, [`Execution::Parallel`] runs on the rayon pool;
//! without it every call runs serially. Results are always returned in index
//! order and reductions happen serially afterwards, so output never depends on
//! the degree of parallelism.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Evaluates `f` on `0..n`, returning results in index order.
pub fn map_indexed<T, F>(n: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Splits `0..total` into fixed-size chunks and evaluates `f(chunk_index, range)`
/// for each. Chunk boundaries depend only on `total` and `chunk`.
pub fn map_chunks<T, F>(total: usize, chunk: usize, exec: Execution, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, std::ops::Range<usize>) -> T + Sync + Send,
{
    let chunk = chunk.max(1);
    let n_chunks = total.div_ceil(chunk);
    map_indexed(n_chunks, exec, |c| {
        let lo = c * chunk;
        let hi = (lo + chunk).min(total);
        f(c, lo..hi)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_cover_range_in_order() {
        let parts = map_chunks(10, 4, Execution::Parallel, |c, r| (c, r));
        assert_eq!(parts, vec![(0, 0..4), (1, 4..8), (2, 8..10)]);
        assert!(map_chunks(0, 4, Execution::Serial, |_, r| r).is_empty());
    }

    #[test]
    fn serial_and_parallel_agree() {
        let f = |i: usize| (i as f64).sqrt();
        assert_eq!(
            map_indexed(1000, Execution::Serial, f),
            map_indexed(1000, Execution::Parallel, f)
        );
    }
}
