//! Coil sensitivities, per-coil supports and Roemer combination.
//!
//! Noise is taken as uncorrelated across coils with equal variance.

use num_complex::Complex64;

use crate::decomposition::{decompose, Decomposition};
use crate::error::{Error, Result};
use crate::grid::{CoilSet, ComplexImage, GridDims, SupportMask};
use crate::par;

pub const DEFAULT_SUPPORT_THRESHOLD: f64 = 0.05;
pub const DEFAULT_SMOOTHING_WIDTH: usize = 5;

/// Relative floor applied to sums of squared magnitudes before dividing.
const FLOOR: f64 = 1e-12;

fn check_dims(images: &[ComplexImage]) -> Result<GridDims> {
    let dims = images.first().ok_or(Error::EmptyInput)?.dims();
    for img in images {
        if img.dims() != dims {
            return Err(Error::DimMismatch(dims, img.dims()));
        }
    }
    Ok(dims)
}

/// Separable box filter of odd `width`, clamping indices at the edges.
pub fn box_smooth(img: &ComplexImage, width: usize) -> ComplexImage {
    let dims = img.dims();
    let half = (width / 2) as isize;
    let (n_rows, n_cols) = (dims.n_rows() as isize, dims.n_cols() as isize);
    let norm = 1.0 / (2 * half + 1) as f64;
    let horiz = ComplexImage::from_fn(dims, |r, c| {
        let mut acc = Complex64::new(0.0, 0.0);
        for d in -half..=half {
            let cc = (c as isize + d).clamp(0, n_cols - 1) as usize;
            acc += img.get(r, cc);
        }
        acc * norm
    });
    ComplexImage::from_fn(dims, |r, c| {
        let mut acc = Complex64::new(0.0, 0.0);
        for d in -half..=half {
            let rr = (r as isize + d).clamp(0, n_rows - 1) as usize;
            acc += horiz.get(rr, c);
        }
        acc * norm
    })
}

/// Pixels whose magnitude reaches `theta` times the image maximum.
pub fn coil_support(coil_image: &ComplexImage, theta: f64) -> Result<SupportMask> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidThreshold(theta));
    }
    let peak = coil_image.max_abs();
    if peak == 0.0 {
        return Err(Error::AllZeroImage);
    }
    let cut = theta * peak;
    let bits = coil_image.data().iter().map(|z| z.norm() >= cut).collect();
    SupportMask::from_bits(coil_image.dims(), bits)
}

/// Smoothed coil images normalised by their root-sum-of-squares, with
/// supports thresholded at [`DEFAULT_SUPPORT_THRESHOLD`].
pub fn estimate_sensitivities(coil_images: &[ComplexImage]) -> Result<CoilSet> {
    estimate_sensitivities_with(coil_images, DEFAULT_SMOOTHING_WIDTH, DEFAULT_SUPPORT_THRESHOLD)
}

pub fn estimate_sensitivities_with(coil_images: &[ComplexImage], width: usize, theta: f64) -> Result<CoilSet> {
    let dims = check_dims(coil_images)?;
    if width == 0 || width.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("smoothing width {width} must be odd")));
    }
    let smoothed = par::map(coil_images, |img| box_smooth(img, width));
    let rss: Vec<f64> = (0..dims.len())
        .map(|i| smoothed.iter().map(|s| s.data()[i].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let floor = FLOOR * rss.iter().copied().fold(0.0, f64::max);
    let floor = floor.max(f64::MIN_POSITIVE);
    let sensitivities = smoothed
        .iter()
        .map(|s| {
            let data = s.data().iter().zip(&rss).map(|(z, &n)| z / n.max(floor)).collect();
            ComplexImage::from_vec_unchecked(dims, data)
        })
        .collect();
    let supports = coil_images
        .iter()
        .map(|img| match coil_support(img, theta) {
            Err(Error::AllZeroImage) => Ok(SupportMask::zeros(dims)),
            other => other,
        })
        .collect::<Result<Vec<_>>>()?;
    CoilSet::new(sensitivities, supports)
}

/// Coil set whose supports come from thresholding the sensitivity magnitudes.
pub fn coil_set_from_sensitivities(sensitivities: Vec<ComplexImage>, theta: f64) -> Result<CoilSet> {
    check_dims(&sensitivities)?;
    let supports = sensitivities.iter().map(|s| coil_support(s, theta)).collect::<Result<Vec<_>>>()?;
    CoilSet::new(sensitivities, supports)
}

/// `sum_j conj(s_j) I_j / max(sum_j |s_j|^2, eps)` per pixel.
pub fn roemer_combine(coil_images: &[ComplexImage], coils: &CoilSet) -> Result<ComplexImage> {
    let dims = check_dims(coil_images)?;
    if coil_images.len() != coils.len() {
        return Err(Error::CoilCountMismatch {
            expected: coils.len(),
            got: coil_images.len(),
        });
    }
    if dims != coils.dims() {
        return Err(Error::DimMismatch(coils.dims(), dims));
    }
    let sens = coils.sensitivities();
    let power: Vec<f64> = (0..dims.len()).map(|i| sens.iter().map(|s| s.data()[i].norm_sqr()).sum()).collect();
    let eps = (FLOOR * power.iter().copied().fold(0.0, f64::max)).max(f64::MIN_POSITIVE);
    let data = (0..dims.len())
        .map(|i| {
            let num: Complex64 = sens
                .iter()
                .zip(coil_images)
                .map(|(s, img)| s.data()[i].conj() * img.data()[i])
                .sum();
            num / power[i].max(eps)
        })
        .collect();
    Ok(ComplexImage::from_vec_unchecked(dims, data))
}

/// Decompose each coil's field of view, `fov` restricted to that coil's support.
pub fn coil_decompositions(fov: &SupportMask, coils: &CoilSet) -> Result<Vec<Decomposition>> {
    coils.supports().iter().map(|s| decompose(&fov.and(s)?)).collect()
}
