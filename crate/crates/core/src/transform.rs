//! In-place fast Walsh-Hadamard transform.

use std::ops::{Add, Sub};

use thiserror::Error;

use crate::exec::Backend;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("transform length {0} is not a power of two")]
pub struct NotPowerOfTwo(pub usize);

/// Values the transform can run over.
pub trait WalshScalar: Copy + Add<Output = Self> + Sub<Output = Self> + Send + Sync {}

impl<T> WalshScalar for T where T: Copy + Add<Output = T> + Sub<Output = T> + Send + Sync {}

/// Below this length the recursive split is not worth it.
const SEQUENTIAL_CUTOFF: usize = 1 << 14;

/// `ŵ(u) = Σ_v w(v) (-1)^{u·v}`, in place, `k·2^k` butterflies.
pub fn fwht<T: WalshScalar>(data: &mut [T]) -> Result<(), NotPowerOfTwo> {
    fwht_with(Backend::default(), data)
}

pub fn fwht_with<T: WalshScalar>(backend: Backend, data: &mut [T]) -> Result<(), NotPowerOfTwo> {
    if !data.len().is_power_of_two() {
        return Err(NotPowerOfTwo(data.len()));
    }
    fwht_rec(backend, data);
    Ok(())
}

fn fwht_rec<T: WalshScalar>(backend: Backend, data: &mut [T]) {
    if backend == Backend::Sequential || data.len() <= SEQUENTIAL_CUTOFF {
        fwht_iterative(data);
        return;
    }
    let half = data.len() / 2;
    let (lo, hi) = data.split_at_mut(half);
    backend.join(|| fwht_rec(backend, lo), || fwht_rec(backend, hi));
    let chunk = SEQUENTIAL_CUTOFF;
    // pair up matching chunks of both halves
    let mut pairs: Vec<(&mut [T], &mut [T])> =
        lo.chunks_mut(chunk).zip(hi.chunks_mut(chunk)).collect();
    backend.for_each_chunk_mut(&mut pairs, 1, |_, p| {
        let (a, b) = &mut p[0];
        butterfly(a, b);
    });
}

#[inline]
fn butterfly<T: WalshScalar>(a: &mut [T], b: &mut [T]) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (s, d) = (*x + *y, *x - *y);
        *x = s;
        *y = d;
    }
}

fn fwht_iterative<T: WalshScalar>(data: &mut [T]) {
    let n = data.len();
    let mut h = 1;
    while h < n {
        for block in data.chunks_mut(2 * h) {
            let (a, b) = block.split_at_mut(h);
            butterfly(a, b);
        }
        h *= 2;
    }
}
