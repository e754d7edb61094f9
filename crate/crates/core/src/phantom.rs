//! Synthetic phantoms built from ellipses and rectangles.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ComplexImage, GridDims, SupportMask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Ellipse,
    Rectangle,
}

/// One shape in pixel coordinates; pixel `(r, c)` has its centre at `(r, c)`.
/// `extent` holds the semi-axes of an ellipse or the half-sizes of a
/// rectangle, as `(rows, cols)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Shape {
    pub kind: ShapeKind,
    pub center: [f64; 2],
    pub extent: [f64; 2],
    /// `[re, im]`; overlapping shapes add.
    pub amplitude: [f64; 2],
}

impl Shape {
    fn contains(&self, r: usize, c: usize) -> bool {
        let dr = r as f64 - self.center[0];
        let dc = c as f64 - self.center[1];
        match self.kind {
            ShapeKind::Ellipse => {
                let term = |d: f64, e: f64| match (e == 0.0, d == 0.0) {
                    (true, true) => 0.0,
                    (true, false) => f64::INFINITY,
                    _ => (d / e).powi(2),
                };
                term(dr, self.extent[0]) + term(dc, self.extent[1]) <= 1.0
            }
            ShapeKind::Rectangle => dr.abs() <= self.extent[0] && dc.abs() <= self.extent[1],
        }
    }

    fn in_bounds(&self, dims: GridDims) -> bool {
        let ok = |center: f64, extent: f64, n: usize| {
            extent >= 0.0 && center.is_finite() && center - extent >= 0.0 && center + extent <= (n - 1) as f64
        };
        ok(self.center[0], self.extent[0], dims.n_rows())
            && ok(self.center[1], self.extent[1], dims.n_cols())
            && self.amplitude.iter().all(|a| a.is_finite())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub n_rows: usize,
    pub n_cols: usize,
    #[serde(default)]
    pub shapes: Vec<Shape>,
    /// Euclidean dilation radius, in pixels, applied to the support.
    #[serde(default)]
    pub support_margin: usize,
}

impl PhantomSpec {
    pub fn dims(&self) -> Result<GridDims> {
        GridDims::new(self.n_rows, self.n_cols)
    }
}

/// Rasterised image and its support (union of shapes dilated by the margin).
pub fn render_phantom(spec: &PhantomSpec) -> Result<(ComplexImage, SupportMask)> {
    let dims = spec.dims()?;
    if let Some(i) = spec.shapes.iter().position(|s| !s.in_bounds(dims)) {
        return Err(Error::ShapeOutOfBounds(i));
    }
    let mut image = ComplexImage::zeros(dims);
    let mut raster = SupportMask::zeros(dims);
    for shape in &spec.shapes {
        let amp = Complex64::new(shape.amplitude[0], shape.amplitude[1]);
        for r in 0..dims.n_rows() {
            for c in 0..dims.n_cols() {
                if shape.contains(r, c) {
                    image.set(r, c, image.get(r, c) + amp);
                    raster.set(r, c, true);
                }
            }
        }
    }
    Ok((image, dilate(&raster, spec.support_margin)))
}

pub fn dilate(mask: &SupportMask, radius: usize) -> SupportMask {
    if radius == 0 {
        return mask.clone();
    }
    let dims = mask.dims();
    let rad = radius as isize;
    let mut out = mask.clone();
    for r in 0..dims.n_rows() {
        for c in 0..dims.n_cols() {
            if !mask.get(r, c) {
                continue;
            }
            for dr in -rad..=rad {
                for dc in -rad..=rad {
                    if dr * dr + dc * dc > rad * rad {
                        continue;
                    }
                    let (rr, cc) = (r as isize + dr, c as isize + dc);
                    if rr >= 0 && cc >= 0 && (rr as usize) < dims.n_rows() && (cc as usize) < dims.n_cols() {
                        out.set(rr as usize, cc as usize, true);
                    }
                }
            }
        }
    }
    out
}
