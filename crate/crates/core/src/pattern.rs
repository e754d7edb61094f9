//! Reduced sampling patterns and sampling burden.

use std::fmt;

use crate::decomposition::Decomposition;
use crate::error::{Error, Result};
use crate::grid::{GridDims, SamplingPattern, SupportMask};

pub fn full_pattern(dims: GridDims) -> SamplingPattern {
    SamplingPattern::new(SupportMask::ones(dims), 1).expect("full grid is non-empty")
}

/// Every even column fully, plus rows `0, m, 2m, ...` of every odd column.
/// `None` leaves the odd columns empty.
pub fn lattice_pattern(dims: GridDims, m: Option<usize>) -> Result<SamplingPattern> {
    let n_rows = dims.n_rows();
    match m {
        Some(m) => {
            if m == 0 || !n_rows.is_multiple_of(m) {
                return Err(Error::NonDivisorFactor { m, n_rows });
            }
            let mask = SupportMask::from_fn(dims, |r, c| c % 2 == 0 || r % m == 0);
            SamplingPattern::new(mask, m)
        }
        None => {
            let mask = SupportMask::from_fn(dims, |_, c| c % 2 == 0);
            SamplingPattern::new(mask, n_rows)
        }
    }
}

pub fn reduced_pattern(dec: &Decomposition) -> SamplingPattern {
    let dims = dec.support.dims();
    let odd = (!dec.inner_interval.is_empty()).then_some(dec.m);
    let mut p = lattice_pattern(dims, odd).expect("decomposition factor divides n_rows");
    if odd.is_none() {
        p = SamplingPattern::new(p.mask().clone(), dec.m).expect("non-empty");
    }
    p
}

/// Acquired count over full-grid count, kept as an exact fraction.
#[derive(Debug, Clone, Copy)]
pub struct Burden {
    pub acquired: usize,
    pub total: usize,
}

impl Burden {
    pub fn ratio(&self) -> f64 {
        self.acquired as f64 / self.total as f64
    }

    /// Exact comparison against `num / den`.
    pub fn equals_fraction(&self, num: usize, den: usize) -> bool {
        self.acquired * den == num * self.total
    }
}

impl PartialEq for Burden {
    fn eq(&self, other: &Self) -> bool {
        self.acquired * other.total == other.acquired * self.total
    }
}

impl Eq for Burden {}

impl PartialOrd for Burden {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Burden {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.acquired * other.total).cmp(&(other.acquired * self.total))
    }
}

impl fmt::Display for Burden {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.acquired, self.total)
    }
}

pub fn burden(p: &SamplingPattern) -> Burden {
    Burden {
        acquired: p.count(),
        total: p.dims().len(),
    }
}

/// Densest of the per-coil reduced patterns; ties go to the lowest coil index.
pub fn pattern_for_coils(decs: &[Decomposition]) -> Result<SamplingPattern> {
    let first = decs.first().ok_or(Error::EmptyInput)?;
    let dims = first.support.dims();
    let mut best: Option<SamplingPattern> = None;
    for d in decs {
        if d.support.dims() != dims {
            return Err(Error::DimMismatch(dims, d.support.dims()));
        }
        let p = reduced_pattern(d);
        if best.as_ref().is_none_or(|b| p.count() > b.count()) {
            best = Some(p);
        }
    }
    Ok(best.expect("at least one decomposition"))
}
