//! Uniform 2-D DFT, brute-force non-uniform DFT pair, and exact spectrum
//! evaluation on a vertically decimated grid.
//!
//! Convention: the forward transform is unnormalized,
//! `X(kr, kc) = sum x(r, c) exp(-2 pi i (kr r / R + kc c / C))`, and the
//! inverse carries the `1 / (R C)` factor.

use std::cell::RefCell;
use std::collections::HashSet;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{ComplexImage, GridDims};
use crate::par;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Reusable row/column plans for one grid size.
#[derive(Clone)]
pub struct Fft2Plan {
    dims: GridDims,
    row_fwd: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

impl Fft2Plan {
    pub fn new(dims: GridDims) -> Self {
        PLANNER.with(|p| {
            let mut p = p.borrow_mut();
            Self {
                dims,
                row_fwd: p.plan_fft_forward(dims.n_cols()),
                row_inv: p.plan_fft_inverse(dims.n_cols()),
                col_fwd: p.plan_fft_forward(dims.n_rows()),
                col_inv: p.plan_fft_inverse(dims.n_rows()),
            }
        })
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    fn run(&self, data: &mut [Complex64], row: &Arc<dyn Fft<f64>>, col: &Arc<dyn Fft<f64>>) {
        let (n_rows, n_cols) = (self.dims.n_rows(), self.dims.n_cols());
        assert_eq!(data.len(), n_rows * n_cols);
        batch(data, n_cols, row);
        if n_rows > 1 {
            let mut t = transpose(data, n_rows, n_cols);
            batch(&mut t, n_rows, col);
            let back = transpose(&t, n_cols, n_rows);
            data.copy_from_slice(&back);
        }
    }

    /// In-place unnormalized forward transform.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, &self.row_fwd, &self.col_fwd);
    }

    /// In-place unnormalized backward transform (`R C` times the inverse).
    pub fn backward(&self, data: &mut [Complex64]) {
        self.run(data, &self.row_inv, &self.col_inv);
    }

    /// In-place inverse transform including the `1 / (R C)` factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.backward(data);
        let scale = 1.0 / self.dims.len() as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }
}

fn batch(data: &mut [Complex64], len: usize, fft: &Arc<dyn Fft<f64>>) {
    let scratch_len = fft.get_inplace_scratch_len();
    par::chunks_for_each(
        data,
        len,
        || vec![Complex64::new(0.0, 0.0); scratch_len],
        |scratch, row| fft.process_with_scratch(row, scratch),
    );
}

fn transpose(data: &[Complex64], n_rows: usize, n_cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for r in 0..n_rows {
        for c in 0..n_cols {
            out[c * n_rows + r] = data[r * n_cols + c];
        }
    }
    out
}

pub fn fft2(img: &ComplexImage) -> ComplexImage {
    let mut data = img.data().to_vec();
    Fft2Plan::new(img.dims()).forward(&mut data);
    ComplexImage::from_vec_unchecked(img.dims(), data)
}

pub fn ifft2(spec: &ComplexImage) -> ComplexImage {
    let mut data = spec.data().to_vec();
    Fft2Plan::new(spec.dims()).inverse(&mut data);
    ComplexImage::from_vec_unchecked(spec.dims(), data)
}

/// Ordered list of distinct on-grid frequency indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreqList {
    dims: GridDims,
    entries: Vec<(usize, usize)>,
}

impl FreqList {
    pub fn new(dims: GridDims, entries: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(entries.len());
        for &(row, col) in &entries {
            if row >= dims.n_rows() || col >= dims.n_cols() {
                return Err(Error::OutOfRangeFrequency { row, col, dims });
            }
            if !seen.insert((row, col)) {
                return Err(Error::DuplicateFrequency { row, col });
            }
        }
        Ok(Self { dims, entries })
    }

    /// Every grid frequency in row-major order.
    pub fn full(dims: GridDims) -> Self {
        let entries = (0..dims.n_rows()).flat_map(|r| (0..dims.n_cols()).map(move |c| (r, c))).collect();
        Self { dims, entries }
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn entries(&self) -> &[(usize, usize)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

// exp(sign * 2 pi i k / n) for k in 0..n; products are reduced mod n so
// every phase is looked up exactly.
fn twiddles(n: usize, sign: f64) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar(1.0, sign * 2.0 * PI * k as f64 / n as f64))
        .collect()
}

/// Direct summation of the DFT at each listed frequency.
pub fn nudft_forward(img: &ComplexImage, freqs: &FreqList) -> Result<Vec<Complex64>> {
    let dims = img.dims();
    if freqs.dims() != dims {
        return Err(Error::DimMismatch(freqs.dims(), dims));
    }
    let (n_rows, n_cols) = (dims.n_rows(), dims.n_cols());
    let tr = twiddles(n_rows, -1.0);
    let tc = twiddles(n_cols, -1.0);
    let data = img.data();
    Ok(par::map(freqs.entries(), |&(kr, kc)| {
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..n_rows {
            let wr = tr[(kr * r) % n_rows];
            let row = &data[r * n_cols..(r + 1) * n_cols];
            let mut row_acc = Complex64::new(0.0, 0.0);
            for (c, &x) in row.iter().enumerate() {
                row_acc += x * tc[(kc * c) % n_cols];
            }
            acc += wr * row_acc;
        }
        acc
    }))
}

/// Conjugate transpose of [`nudft_forward`].
pub fn nudft_adjoint(samples: &[Complex64], freqs: &FreqList, dims: GridDims) -> Result<ComplexImage> {
    if freqs.dims() != dims {
        return Err(Error::DimMismatch(freqs.dims(), dims));
    }
    if samples.len() != freqs.len() {
        return Err(Error::LengthMismatch {
            expected: freqs.len(),
            got: samples.len(),
        });
    }
    let (n_rows, n_cols) = (dims.n_rows(), dims.n_cols());
    let tr = twiddles(n_rows, 1.0);
    let tc = twiddles(n_cols, 1.0);
    let rows = par::map_range(n_rows, |r| {
        let mut row = vec![Complex64::new(0.0, 0.0); n_cols];
        for (&(kr, kc), &y) in freqs.entries().iter().zip(samples) {
            let yr = y * tr[(kr * r) % n_rows];
            for (c, out) in row.iter_mut().enumerate() {
                *out += yr * tc[(kc * c) % n_cols];
            }
        }
        row
    });
    Ok(ComplexImage::from_vec_unchecked(dims, rows.concat()))
}

/// Spectrum of `img` at rows `0, m, 2m, ...` of the full grid, returned on
/// the `(n_rows / m) x n_cols` grid. Folds the image vertically with period
/// `n_rows / m` and transforms the folded image.
pub fn spectrum_on_inner_grid(img: &ComplexImage, m: usize) -> Result<ComplexImage> {
    let dims = img.dims();
    if m == 0 || !dims.n_rows().is_multiple_of(m) {
        return Err(Error::NonDivisorFactor { m, n_rows: dims.n_rows() });
    }
    let inner = dims.decimated(m);
    let mut folded = fold_rows(img, inner.n_rows());
    Fft2Plan::new(inner).forward(&mut folded);
    Ok(ComplexImage::from_vec_unchecked(inner, folded))
}

/// Sum rows congruent modulo `period`.
pub(crate) fn fold_rows(img: &ComplexImage, period: usize) -> Vec<Complex64> {
    let n_cols = img.dims().n_cols();
    let mut folded = vec![Complex64::new(0.0, 0.0); period * n_cols];
    for (r, row) in img.data().chunks_exact(n_cols).enumerate() {
        let dst = &mut folded[(r % period) * n_cols..(r % period + 1) * n_cols];
        for (d, s) in dst.iter_mut().zip(row) {
            *d += s;
        }
    }
    folded
}
