//! Inner/outer split of a field of view.
//!
//! Keeping only the even k-space columns aliases the image onto itself
//! shifted by half the horizontal extent. Rows where the FOV overlaps that
//! shifted copy form the inner band; everything else (the outer region)
//! survives the aliasing untouched.

use crate::error::{Error, Result};
use crate::grid::SupportMask;

/// Circular band of rows `start, start + 1, ..., start + height - 1`
/// (mod `n_rows`). A zero height denotes the empty band.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowInterval {
    pub start: usize,
    pub height: usize,
}

impl RowInterval {
    pub fn empty() -> Self {
        Self { start: 0, height: 0 }
    }

    pub fn is_empty(&self) -> bool {
        self.height == 0
    }

    pub fn contains(&self, row: usize, n_rows: usize) -> bool {
        (row + n_rows - self.start) % n_rows < self.height
    }

    pub fn rows(&self, n_rows: usize) -> impl Iterator<Item = usize> {
        let start = self.start;
        (0..self.height).map(move |i| (start + i) % n_rows)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub support: SupportMask,
    pub inner: SupportMask,
    pub outer: SupportMask,
    pub inner_interval: RowInterval,
    /// Vertical decimation factor for the odd k-space columns.
    pub m: usize,
}

impl Decomposition {
    pub fn inner_height(&self) -> usize {
        self.inner_interval.height
    }
}

/// Rows `r` with some column `c` such that both `S(r, c)` and
/// `S(r, c - n_cols / 2)` are set, in increasing order.
pub fn overlap_rows(support: &SupportMask) -> Vec<usize> {
    let dims = support.dims();
    let half = dims.n_cols() / 2;
    (0..dims.n_rows())
        .filter(|&r| (0..half).any(|c| support.get(r, c) && support.get(r, c + half)))
        .collect()
}

/// Shortest circular interval covering `rows`, ties going to the smallest
/// start row.
pub fn covering_interval(rows: &[usize], n_rows: usize) -> RowInterval {
    if rows.is_empty() {
        return RowInterval::empty();
    }
    // Any optimal interval starts at a covered row.
    let mut best = RowInterval {
        start: rows[0],
        height: usize::MAX,
    };
    for &start in rows {
        let height = rows.iter().map(|&r| (r + n_rows - start) % n_rows + 1).max().unwrap_or(1);
        if height < best.height {
            best = RowInterval { start, height };
        }
    }
    best
}

/// Largest divisor `m` of `n_rows` with `n_rows / m >= max(height, 1)`.
pub fn decimation_factor(n_rows: usize, height: usize) -> usize {
    let need = height.max(1);
    (1..=n_rows)
        .rev()
        .find(|&m| n_rows.is_multiple_of(m) && n_rows / m >= need)
        .unwrap_or(1)
}

pub fn decompose(support: &SupportMask) -> Result<Decomposition> {
    let dims = support.dims();
    if !dims.n_cols().is_multiple_of(2) {
        return Err(Error::InvalidGrid {
            n_rows: dims.n_rows(),
            n_cols: dims.n_cols(),
            reason: "column count must be even",
        });
    }
    if support.count() == 0 {
        return Err(Error::EmptySupport);
    }
    let n_rows = dims.n_rows();
    let interval = covering_interval(&overlap_rows(support), n_rows);
    let in_band = |r: usize| interval.contains(r, n_rows);
    let inner = SupportMask::from_fn(dims, |r, c| in_band(r) && support.get(r, c));
    let outer = SupportMask::from_fn(dims, |r, c| !in_band(r) && support.get(r, c));
    Ok(Decomposition {
        support: support.clone(),
        inner,
        outer,
        inner_interval: interval,
        m: decimation_factor(n_rows, interval.height),
    })
}
