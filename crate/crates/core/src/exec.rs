//! Serial/parallel execution policy.
//!
//! Every data-parallel loop in the crate goes through [`Exec`]. With the
//! `parallel` feature disabled, `Exec::Parallel` silently runs serially.
//! Floating-point reductions are split into fixed-size chunks whose partial
//! results are combined in index order, so both policies give bit-identical
//! answers independent of thread scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length used for deterministic reductions.
const REDUCE_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Exec {
    Serial,
    #[default]
    Parallel,
}

impl Exec {
    /// True when this policy will actually fan out over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }

    /// Apply `f(chunk_index, chunk)` to consecutive `chunk`-sized pieces.
    pub fn for_each_chunk_mut<T, F>(self, data: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            data.par_chunks_mut(chunk)
                .enumerate()
                .for_each(|(i, c)| f(i, c));
            return;
        }
        data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
    }

    /// Element-wise in-place update `f(index, value)`.
    pub fn for_each_indexed_mut<T, F>(self, data: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize, &mut T) + Sync + Send,
    {
        self.for_each_chunk_mut(data, REDUCE_CHUNK, |ci, c| {
            let base = ci * REDUCE_CHUNK;
            for (j, v) in c.iter_mut().enumerate() {
                f(base + j, v);
            }
        });
    }

    /// `(0..n).map(f).collect()`.
    pub fn map_collect<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        if self.is_parallel() {
            return (0..n).into_par_iter().map(f).collect();
        }
        (0..n).map(f).collect()
    }

    /// Deterministic `Σ_{i<n} f(i)`.
    pub fn sum<F>(self, n: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let chunks = n.div_ceil(REDUCE_CHUNK);
        let partial = self.map_collect(chunks, |c| {
            let lo = c * REDUCE_CHUNK;
            let hi = (lo + REDUCE_CHUNK).min(n);
            (lo..hi).map(&f).sum::<f64>()
        });
        partial.into_iter().sum()
    }

    /// `max_{i<n} f(i)`, NaN-propagating; `-inf` for `n == 0`.
    pub fn max<F>(self, n: usize, f: F) -> f64
    where
        F: Fn(usize) -> f64 + Sync + Send,
    {
        let chunks = n.div_ceil(REDUCE_CHUNK);
        let partial = self.map_collect(chunks, |c| {
            let lo = c * REDUCE_CHUNK;
            let hi = (lo + REDUCE_CHUNK).min(n);
            (lo..hi).map(&f).fold(f64::NEG_INFINITY, nan_max)
        });
        partial.into_iter().fold(f64::NEG_INFINITY, nan_max)
    }
}

fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serial_and_parallel_sums_are_bit_identical() {
        let f = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let a = Exec::Serial.sum(100_003, f);
        let b = Exec::Parallel.sum(100_003, f);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn max_propagates_nan() {
        assert!(Exec::Serial.max(10, |i| if i == 7 { f64::NAN } else { 1.0 }).is_nan());
        assert_eq!(Exec::Parallel.max(0, |_| 1.0), f64::NEG_INFINITY);
    }

    #[test]
    fn chunked_update_visits_every_index() {
        let mut v = vec![0usize; 10_000];
        Exec::Parallel.for_each_indexed_mut(&mut v, |i, x| *x = i);
        assert!(v.iter().enumerate().all(|(i, &x)| i == x));
    }
}
