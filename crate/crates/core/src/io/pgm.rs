//! Binary 16-bit PGM (P5) magnitude export.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;
use crate::grid::{ComplexImage, GridDims};

/// Moves the zero frequency to the centre of the grid, for display.
pub fn centered(img: &ComplexImage) -> ComplexImage {
    let dims = img.dims();
    let (hr, hc) = (dims.n_rows() / 2, dims.n_cols() / 2);
    ComplexImage::from_fn(dims, |r, c| {
        img.get((r + dims.n_rows() - hr) % dims.n_rows(), (c + dims.n_cols() - hc) % dims.n_cols())
    })
}

/// Magnitudes mapped to `0..=65535`: min-max scaled, or `|z| * scale`
/// clamped to `[0, 1]` when a fixed scale is given.
pub fn magnitude_levels(img: &ComplexImage, scale: Option<f64>) -> Vec<u16> {
    let mags: Vec<f64> = img.data().iter().map(|z| z.norm()).collect();
    let (lo, span) = match scale {
        Some(s) => (0.0, if s > 0.0 { 1.0 / s } else { f64::INFINITY }),
        None => {
            let lo = mags.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = mags.iter().copied().fold(0.0, f64::max);
            (lo, hi - lo)
        }
    };
    mags.iter()
        .map(|&m| {
            let t = if span > 0.0 && span.is_finite() {
                ((m - lo) / span).clamp(0.0, 1.0)
            } else {
                0.0
            };
            (t * 65535.0).round() as u16
        })
        .collect()
}

pub fn write_pgm16<W: Write>(mut w: W, dims: GridDims, levels: &[u16]) -> Result<()> {
    write!(w, "P5\n{} {}\n65535\n", dims.n_cols(), dims.n_rows())?;
    for v in levels {
        w.write_all(&v.to_be_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_pgm(path: impl AsRef<Path>, img: &ComplexImage, scale: Option<f64>) -> Result<()> {
    let levels = magnitude_levels(img, scale);
    write_pgm16(BufWriter::new(File::create(path)?), img.dims(), &levels)
}
