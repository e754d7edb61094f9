use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{ComplexImage, SupportMask};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub mse: f64,
    pub max_abs_diff: f64,
    /// `||a - b|| / ||b||`; 0 when both vanish, infinite when only `b` does.
    pub rel_l2: f64,
}

/// Error statistics of `a` against the reference `b`, over `mask` if given.
pub fn metrics(a: &ComplexImage, b: &ComplexImage, mask: Option<&SupportMask>) -> Result<Metrics> {
    if a.dims() != b.dims() {
        return Err(Error::DimMismatch(a.dims(), b.dims()));
    }
    if let Some(m) = mask {
        if m.dims() != a.dims() {
            return Err(Error::DimMismatch(a.dims(), m.dims()));
        }
    }
    let mut count = 0usize;
    let (mut diff_sq, mut ref_sq, mut max_abs) = (0.0, 0.0, 0.0f64);
    for (i, (x, y)) in a.data().iter().zip(b.data()).enumerate() {
        if mask.is_some_and(|m| !m.bits()[i]) {
            continue;
        }
        let d = (x - y).norm_sqr();
        diff_sq += d;
        ref_sq += y.norm_sqr();
        max_abs = max_abs.max(d.sqrt());
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptySupport);
    }
    let rel_l2 = match (diff_sq == 0.0, ref_sq == 0.0) {
        (true, _) => 0.0,
        (false, true) => f64::INFINITY,
        _ => (diff_sq / ref_sq).sqrt(),
    };
    Ok(Metrics {
        mse: diff_sq / count as f64,
        max_abs_diff: max_abs,
        rel_l2,
    })
}
