//! Walks over the half cube `{b in {+-1}^N : b_0 = +1}` in Gray-code order,
//! split into contiguous index ranges so that ranges can run in parallel.
//!
//! Index `i` maps to the Gray word `g = i ^ (i >> 1)`; bit `j` of `g` set
//! means `b_{j+1} = -1`. Consecutive indices differ in exactly one bit.

use rayon::prelude::*;

pub(crate) const CHUNK: u64 = 1 << 12;

pub(crate) fn half_cube_size(n: usize) -> u64 {
    1u64 << (n.max(1) - 1)
}

pub(crate) fn bits_at(n: usize, index: u64) -> Vec<f64> {
    let g = index ^ (index >> 1);
    (0..n)
        .map(|p| if p > 0 && (g >> (p - 1)) & 1 == 1 { -1.0 } else { 1.0 })
        .collect()
}

/// Position flipped when moving from `index - 1` to `index`.
#[inline]
pub(crate) fn changed_position(index: u64) -> usize {
    index.trailing_zeros() as usize + 1
}

/// Visit every index in `[lo, hi)` with the current sign vector and a
/// per-range state that the caller keeps in sync with single-bit flips.
pub(crate) fn walk_range<S>(
    n: usize,
    lo: u64,
    hi: u64,
    init: impl Fn(&[f64]) -> S,
    flip: impl Fn(&mut S, &[f64], usize),
    mut visit: impl FnMut(&S, &[f64], u64),
) {
    if lo >= hi {
        return;
    }
    let mut bits = bits_at(n, lo);
    let mut state = init(&bits);
    visit(&state, &bits, lo);
    for index in lo + 1..hi {
        let p = changed_position(index);
        // `bits` still holds the old value when the state is updated
        flip(&mut state, &bits, p);
        bits[p] = -bits[p];
        visit(&state, &bits, index);
    }
}

/// Run `per_range` over contiguous chunks of the half cube in parallel,
/// returning the per-chunk results in index order.
pub(crate) fn par_chunks<R: Send>(n: usize, per_range: impl Fn(u64, u64) -> R + Sync) -> Vec<R> {
    let total = half_cube_size(n);
    let chunks = total.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| per_range(c * CHUNK, ((c + 1) * CHUNK).min(total)))
        .collect()
}
