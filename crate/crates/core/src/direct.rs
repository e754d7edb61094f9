//! Direct (non-iterative) reconstruction from a reduced pattern.
//!
//! Outer region: inverse DFT of the even columns, doubled to undo the
//! column decimation, masked to `S_outer`. Inner region: the acquired
//! samples at rows `0, m, 2m, ...` form a complete Cartesian grid for the
//! band. Subtracting the outer region's spectrum on that grid and inverting
//! gives the band folded with period `n_rows / m`, which is then placed back
//! on the band rows. Because every acquired frequency lies on the full grid
//! the gridding steps are exact row selections and folds.

use num_complex::Complex64;

use crate::coils::roemer_combine;
use crate::decomposition::Decomposition;
use crate::error::{Error, Result};
use crate::fourier::{spectrum_on_inner_grid, Fft2Plan};
use crate::grid::{CoilSet, ComplexImage, KSpaceData, SamplingPattern};
use crate::par;

fn check_even_columns(pattern: &SamplingPattern) -> Result<()> {
    let dims = pattern.dims();
    for c in (0..dims.n_cols()).step_by(2) {
        for r in 0..dims.n_rows() {
            if !pattern.is_marked(r, c) {
                return Err(Error::PatternMismatch(format!("even column {c} is missing row {r}")));
            }
        }
    }
    Ok(())
}

/// Returns the odd-column decimation factor to use for `dec`, or `None`
/// when the inner band is empty.
fn check_pattern(pattern: &SamplingPattern, dec: &Decomposition) -> Result<Option<usize>> {
    let dims = pattern.dims();
    if dims != dec.support.dims() {
        return Err(Error::DimMismatch(dims, dec.support.dims()));
    }
    check_even_columns(pattern)?;
    if dec.inner_interval.is_empty() {
        return Ok(None);
    }
    let n_rows = dims.n_rows();
    let m = pattern.subsample_factor_m();
    if !n_rows.is_multiple_of(m) {
        return Err(Error::PatternMismatch(format!("factor {m} does not divide {n_rows} rows")));
    }
    if n_rows / m < dec.inner_height() {
        return Err(Error::PatternMismatch(format!(
            "factor {m} too coarse for an inner band of {} rows",
            dec.inner_height()
        )));
    }
    for c in (1..dims.n_cols()).step_by(2) {
        for r in (0..n_rows).step_by(m) {
            if !pattern.is_marked(r, c) {
                return Err(Error::PatternMismatch(format!("odd column {c} is missing row {r}")));
            }
        }
    }
    Ok(Some(m))
}

fn single_coil(data: &KSpaceData) -> Result<()> {
    if data.coils() != 1 {
        return Err(Error::MultiCoilNotAllowed);
    }
    Ok(())
}

fn outer_from_spectrum(spectrum: &ComplexImage, dec: &Decomposition, plan: &Fft2Plan) -> ComplexImage {
    let dims = spectrum.dims();
    let n_cols = dims.n_cols();
    let mut even = spectrum.data().to_vec();
    for row in even.chunks_exact_mut(n_cols) {
        for z in row.iter_mut().skip(1).step_by(2) {
            *z = Complex64::new(0.0, 0.0);
        }
    }
    plan.inverse(&mut even);
    let zero = Complex64::new(0.0, 0.0);
    let data = even
        .iter()
        .zip(dec.outer.bits())
        .map(|(&z, &keep)| if keep { 2.0 * z } else { zero })
        .collect();
    ComplexImage::from_vec_unchecked(dims, data)
}

fn direct_from_spectrum(spectrum: &ComplexImage, dec: &Decomposition, m: Option<usize>) -> ComplexImage {
    let dims = spectrum.dims();
    let plan = Fft2Plan::new(dims);
    let mut image = outer_from_spectrum(spectrum, dec, &plan);
    let Some(m) = m else {
        return image;
    };
    let (n_rows, n_cols) = (dims.n_rows(), dims.n_cols());
    let period = n_rows / m;

    let outer_spec = spectrum_on_inner_grid(&image, m).expect("factor checked");
    let mut inner = Vec::with_capacity(period * n_cols);
    for t in 0..period {
        let src = &spectrum.data()[t * m * n_cols..(t * m + 1) * n_cols];
        let sub = &outer_spec.data()[t * n_cols..(t + 1) * n_cols];
        inner.extend(src.iter().zip(sub).map(|(a, b)| a - b));
    }
    Fft2Plan::new(dims.decimated(m)).inverse(&mut inner);

    for r in dec.inner_interval.rows(n_rows) {
        let folded = &inner[(r % period) * n_cols..(r % period + 1) * n_cols];
        for (c, &z) in folded.iter().enumerate() {
            if dec.support.get(r, c) {
                image.set(r, c, z);
            }
        }
    }
    image
}

/// Outer region only: `2 S_outer (.) ifft2(even columns)`.
pub fn recon_outer(data: &KSpaceData, dec: &Decomposition) -> Result<ComplexImage> {
    single_coil(data)?;
    if data.pattern().dims() != dec.support.dims() {
        return Err(Error::DimMismatch(data.pattern().dims(), dec.support.dims()));
    }
    check_even_columns(data.pattern())?;
    let spectrum = data.zero_filled(0);
    Ok(outer_from_spectrum(&spectrum, dec, &Fft2Plan::new(spectrum.dims())))
}

/// Full direct reconstruction for one coil. The output is zero outside the
/// decomposition's support.
pub fn recon_direct(data: &KSpaceData, dec: &Decomposition) -> Result<ComplexImage> {
    single_coil(data)?;
    let m = check_pattern(data.pattern(), dec)?;
    Ok(direct_from_spectrum(&data.zero_filled(0), dec, m))
}

/// Reconstruct each coil with its own decomposition on the shared pattern,
/// then merge with Roemer weighting.
pub fn recon_direct_parallel(data: &KSpaceData, decs: &[Decomposition], coils: &CoilSet) -> Result<ComplexImage> {
    let c = data.coils();
    if decs.len() != c {
        return Err(Error::CoilCountMismatch {
            expected: c,
            got: decs.len(),
        });
    }
    if coils.len() != c {
        return Err(Error::CoilCountMismatch {
            expected: c,
            got: coils.len(),
        });
    }
    let factors = decs.iter().map(|d| check_pattern(data.pattern(), d)).collect::<Result<Vec<_>>>()?;
    let images = par::map_range(c, |j| direct_from_spectrum(&data.zero_filled(j), &decs[j], factors[j]));
    roemer_combine(&images, coils)
}
