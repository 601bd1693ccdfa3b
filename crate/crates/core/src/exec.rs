//! Execution backend selection.
//!
//! Every data-parallel kernel in this crate takes a [`Backend`]. With the
//! `parallel` feature (default) the [`Backend::Parallel`] variant runs on the
//! rayon global pool; without it only the sequential path is compiled. Both
//! paths merge partial results additively, so their outputs are bit-identical.

/// Where data-parallel loops run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Backend {
    /// Plain loops on the calling thread.
    #[cfg_attr(not(feature = "parallel"), default)]
    Sequential,
    /// Work-stealing loops on the rayon global pool.
    #[cfg(feature = "parallel")]
    #[default]
    Parallel,
}

impl Backend {
    /// Number of workers this backend would use.
    pub fn workers(self) -> usize {
        match self {
            Backend::Sequential => 1,
            #[cfg(feature = "parallel")]
            Backend::Parallel => rayon::current_num_threads(),
        }
    }

    /// Maps `f` over `0..len` split into contiguous chunks of at most
    /// `chunk` indices, returning per-chunk results in index order.
    pub(crate) fn map_chunks<R, F>(self, len: usize, chunk: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(std::ops::Range<usize>) -> R + Send + Sync,
    {
        let chunk = chunk.max(1);
        let ranges: Vec<_> = (0..len)
            .step_by(chunk)
            .map(|start| start..(start + chunk).min(len))
            .collect();
        match self {
            Backend::Sequential => ranges.into_iter().map(f).collect(),
            #[cfg(feature = "parallel")]
            Backend::Parallel => {
                use rayon::prelude::*;
                ranges.into_par_iter().map(f).collect()
            }
        }
    }

    /// Applies `f` to each chunk of `data` together with the chunk's
    /// starting offset.
    pub(crate) fn for_each_chunk_mut<T, F>(self, data: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Send + Sync,
    {
        let chunk = chunk.max(1);
        match self {
            Backend::Sequential => {
                for (k, c) in data.chunks_mut(chunk).enumerate() {
                    f(k * chunk, c);
                }
            }
            #[cfg(feature = "parallel")]
            Backend::Parallel => {
                use rayon::prelude::*;
                data.par_chunks_mut(chunk)
                    .enumerate()
                    .for_each(|(k, c)| f(k * chunk, c));
            }
        }
    }

    /// Runs two closures, concurrently when the backend allows it.
    pub(crate) fn join<A, B, RA, RB>(self, a: A, b: B) -> (RA, RB)
    where
        A: FnOnce() -> RA + Send,
        B: FnOnce() -> RB + Send,
        RA: Send,
        RB: Send,
    {
        match self {
            Backend::Sequential => (a(), b()),
            #[cfg(feature = "parallel")]
            Backend::Parallel => rayon::join(a, b),
        }
    }
}

/// Elementwise `dst += src`.
pub(crate) fn add_into(dst: &mut [i64], src: &[i64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += *s;
    }
}
