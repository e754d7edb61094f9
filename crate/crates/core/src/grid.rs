//! Grid conventions and the data types shared by every other module.
//!
//! Images and spectra are stored row-major. Spectra use DFT-natural index
//! order, so the zero frequency sits at `(0, 0)`; centred ordering only
//! appears when exporting for display. Physical units are not tracked: the
//! grid is indexed in pixels and k-space in cycles per grid.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Pixel dimensions of an image or of the matching Cartesian k-space grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridDims {
    n_rows: usize,
    n_cols: usize,
}

impl GridDims {
    /// Validated user-facing grid: at least 2x2 with an even column count,
    /// so that half the horizontal extent is a whole number of pixels.
    pub fn new(n_rows: usize, n_cols: usize) -> Result<Self> {
        if n_rows < 2 || n_cols < 2 {
            return Err(Error::InvalidGrid {
                n_rows,
                n_cols,
                reason: "both extents must be at least 2",
            });
        }
        if !n_cols.is_multiple_of(2) {
            return Err(Error::InvalidGrid {
                n_rows,
                n_cols,
                reason: "column count must be even",
            });
        }
        Ok(Self { n_rows, n_cols })
    }

    /// Sub-grid produced by vertical decimation. May be a single row.
    pub(crate) fn decimated(self, m: usize) -> Self {
        debug_assert!(m > 0 && self.n_rows.is_multiple_of(m));
        Self {
            n_rows: self.n_rows / m,
            n_cols: self.n_cols,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn len(&self) -> usize {
        self.n_rows * self.n_cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.n_cols + col
    }

    fn check_same(&self, other: &GridDims) -> Result<()> {
        if self != other {
            return Err(Error::DimMismatch(*self, *other));
        }
        Ok(())
    }
}

impl fmt::Display for GridDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.n_rows, self.n_cols)
    }
}

fn shift_rows<T: Clone>(dims: GridDims, data: &[T], shift: i64) -> Vec<T> {
    let n = dims.n_cols;
    let s = shift.rem_euclid(n as i64) as usize;
    let mut out = Vec::with_capacity(data.len());
    for row in data.chunks_exact(n) {
        // out(c) = in((c - s) mod n)
        out.extend_from_slice(&row[n - s..]);
        out.extend_from_slice(&row[..n - s]);
    }
    out
}

/// Dense complex-valued image or spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexImage {
    dims: GridDims,
    data: Vec<Complex64>,
}

impl ComplexImage {
    pub fn zeros(dims: GridDims) -> Self {
        Self {
            dims,
            data: vec![Complex64::new(0.0, 0.0); dims.len()],
        }
    }

    pub fn from_vec(dims: GridDims, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dims.len() {
            return Err(Error::LengthMismatch {
                expected: dims.len(),
                got: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { dims, data })
    }

    pub(crate) fn from_vec_unchecked(dims: GridDims, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), dims.len());
        Self { dims, data }
    }

    pub fn from_fn(dims: GridDims, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dims.len());
        for r in 0..dims.n_rows {
            for c in 0..dims.n_cols {
                data.push(f(r, c));
            }
        }
        Self { dims, data }
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[self.dims.index(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        let i = self.dims.index(row, col);
        self.data[i] = value;
    }

    /// `out(r, c) = in(r, (c - shift) mod n_cols)`.
    pub fn circular_shift_u(&self, shift: i64) -> Self {
        Self {
            dims: self.dims,
            data: shift_rows(self.dims, &self.data, shift),
        }
    }

    /// Pointwise product.
    pub fn hadamard(&self, other: &ComplexImage) -> Result<Self> {
        self.dims.check_same(&other.dims)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a * b).collect();
        Ok(Self { dims: self.dims, data })
    }

    /// Pointwise product with a binary mask.
    pub fn masked(&self, mask: &SupportMask) -> Result<Self> {
        self.dims.check_same(&mask.dims)?;
        let zero = Complex64::new(0.0, 0.0);
        let data = self
            .data
            .iter()
            .zip(&mask.bits)
            .map(|(&a, &keep)| if keep { a } else { zero })
            .collect();
        Ok(Self { dims: self.dims, data })
    }

    pub fn scale(&mut self, factor: f64) {
        for z in &mut self.data {
            *z *= factor;
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Binary raster over the image grid: `true` marks a pixel inside the FOV.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportMask {
    dims: GridDims,
    bits: Vec<bool>,
}

impl SupportMask {
    pub fn zeros(dims: GridDims) -> Self {
        Self {
            dims,
            bits: vec![false; dims.len()],
        }
    }

    pub fn ones(dims: GridDims) -> Self {
        Self {
            dims,
            bits: vec![true; dims.len()],
        }
    }

    pub fn from_bits(dims: GridDims, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != dims.len() {
            return Err(Error::LengthMismatch {
                expected: dims.len(),
                got: bits.len(),
            });
        }
        Ok(Self { dims, bits })
    }

    pub fn from_fn(dims: GridDims, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(dims.len());
        for r in 0..dims.n_rows {
            for c in 0..dims.n_cols {
                bits.push(f(r, c));
            }
        }
        Self { dims, bits }
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[self.dims.index(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        let i = self.dims.index(row, col);
        self.bits[i] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn row_is_empty(&self, row: usize) -> bool {
        let n = self.dims.n_cols;
        !self.bits[row * n..(row + 1) * n].iter().any(|&b| b)
    }

    pub fn circular_shift_u(&self, shift: i64) -> Self {
        Self {
            dims: self.dims,
            bits: shift_rows(self.dims, &self.bits, shift),
        }
    }

    pub fn complement(&self) -> Self {
        Self {
            dims: self.dims,
            bits: self.bits.iter().map(|&b| !b).collect(),
        }
    }

    pub fn and(&self, other: &SupportMask) -> Result<Self> {
        self.dims.check_same(&other.dims)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| a && b).collect();
        Ok(Self { dims: self.dims, bits })
    }

    pub fn or(&self, other: &SupportMask) -> Result<Self> {
        self.dims.check_same(&other.dims)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| a || b).collect();
        Ok(Self { dims: self.dims, bits })
    }

    /// True when `self` marks only pixels that `other` also marks.
    pub fn is_subset_of(&self, other: &SupportMask) -> bool {
        self.dims == other.dims && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    /// `M_S`: pixels inside the mask in row-major order.
    pub fn gather(&self, img: &ComplexImage) -> Result<Vec<Complex64>> {
        self.dims.check_same(&img.dims)?;
        Ok(self.gather_slice(&img.data))
    }

    pub(crate) fn gather_slice(&self, data: &[Complex64]) -> Vec<Complex64> {
        self.bits.iter().zip(data).filter_map(|(&keep, &z)| keep.then_some(z)).collect()
    }

    /// `M_S^T`: places a pixel vector back on the grid, zero elsewhere.
    pub fn scatter(&self, values: &[Complex64]) -> Result<ComplexImage> {
        let count = self.count();
        if values.len() != count {
            return Err(Error::LengthMismatch {
                expected: count,
                got: values.len(),
            });
        }
        let mut img = ComplexImage::zeros(self.dims);
        self.scatter_into(values, &mut img.data);
        Ok(img)
    }

    pub(crate) fn scatter_into(&self, values: &[Complex64], out: &mut [Complex64]) {
        let mut it = values.iter();
        for (dst, &keep) in out.iter_mut().zip(&self.bits) {
            if keep {
                *dst = *it.next().expect("value count checked by caller");
            }
        }
    }
}

/// Binary raster over the full Cartesian k-space grid marking acquired
/// frequencies, together with the vertical decimation factor used on the
/// odd columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingPattern {
    mask: SupportMask,
    subsample_factor_m: usize,
}

impl SamplingPattern {
    pub fn new(mask: SupportMask, subsample_factor_m: usize) -> Result<Self> {
        if subsample_factor_m == 0 {
            return Err(Error::InvalidParameter("subsample factor must be positive".into()));
        }
        if mask.count() == 0 {
            return Err(Error::InvalidParameter("sampling pattern has no samples".into()));
        }
        Ok(Self { mask, subsample_factor_m })
    }

    /// Guess the decimation factor from the marked rows of the odd columns:
    /// the lattice spacing when they form `{0, m, 2m, ...}` in every odd
    /// column, `n_rows` when the odd columns are empty and 1 otherwise.
    pub fn infer_factor(mask: &SupportMask) -> usize {
        let dims = mask.dims();
        let n_rows = dims.n_rows();
        let rows: Vec<usize> = (0..n_rows).filter(|&r| mask.get(r, 1)).collect();
        let consistent = (1..dims.n_cols())
            .step_by(2)
            .all(|c| (0..n_rows).all(|r| mask.get(r, c) == mask.get(r, 1)));
        if !consistent {
            return 1;
        }
        if rows.is_empty() {
            return n_rows;
        }
        let m = if rows.len() == 1 { n_rows } else { rows[1] - rows[0] };
        let lattice =
            rows[0] == 0 && n_rows.is_multiple_of(m) && rows.len() == n_rows / m && rows.iter().enumerate().all(|(i, &r)| r == i * m);
        if lattice {
            m
        } else {
            1
        }
    }

    pub fn dims(&self) -> GridDims {
        self.mask.dims()
    }

    pub fn mask(&self) -> &SupportMask {
        &self.mask
    }

    pub fn subsample_factor_m(&self) -> usize {
        self.subsample_factor_m
    }

    pub fn is_marked(&self, row: usize, col: usize) -> bool {
        self.mask.get(row, col)
    }

    pub fn count(&self) -> usize {
        self.mask.count()
    }

    /// Acquired frequencies in row-major order.
    pub fn marked(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.dims().n_cols();
        self.mask
            .bits()
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i / n, i % n))
    }
}

/// Acquired complex samples, one vector per coil, in the row-major order of
/// the pattern's marked entries.
#[derive(Debug, Clone, PartialEq)]
pub struct KSpaceData {
    pattern: SamplingPattern,
    samples: Vec<Vec<Complex64>>,
    normalization: f64,
}

impl KSpaceData {
    pub fn new(pattern: SamplingPattern, samples: Vec<Vec<Complex64>>) -> Result<Self> {
        Self::with_normalization(pattern, samples, 1.0)
    }

    /// `normalization` records the factor the spectra were multiplied by
    /// when the data was simulated.
    pub fn with_normalization(pattern: SamplingPattern, samples: Vec<Vec<Complex64>>, normalization: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        let expected = pattern.count();
        for coil in &samples {
            if coil.len() != expected {
                return Err(Error::LengthMismatch { expected, got: coil.len() });
            }
            if let Some(i) = coil.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite(i));
            }
        }
        Ok(Self {
            pattern,
            samples,
            normalization,
        })
    }

    pub fn pattern(&self) -> &SamplingPattern {
        &self.pattern
    }

    pub fn coils(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[Vec<Complex64>] {
        &self.samples
    }

    pub fn coil(&self, j: usize) -> &[Complex64] {
        &self.samples[j]
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Zero-filled full-grid spectrum for coil `j`.
    pub fn zero_filled(&self, j: usize) -> ComplexImage {
        self.pattern
            .mask()
            .scatter(&self.samples[j])
            .expect("sample count checked at construction")
    }
}

/// Per-coil sensitivity maps and fields of view on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoilSet {
    dims: GridDims,
    sensitivities: Vec<ComplexImage>,
    supports: Vec<SupportMask>,
}

impl CoilSet {
    pub fn new(sensitivities: Vec<ComplexImage>, supports: Vec<SupportMask>) -> Result<Self> {
        let first = sensitivities.first().ok_or(Error::EmptyInput)?;
        let dims = first.dims();
        if supports.len() != sensitivities.len() {
            return Err(Error::CoilCountMismatch {
                expected: sensitivities.len(),
                got: supports.len(),
            });
        }
        for s in &sensitivities {
            dims.check_same(&s.dims())?;
        }
        for s in &supports {
            dims.check_same(&s.dims())?;
        }
        let mut union = SupportMask::zeros(dims);
        for s in &supports {
            union = union.or(s)?;
        }
        let covered = sensitivities.iter().any(|sens| {
            sens.data()
                .iter()
                .zip(union.bits())
                .any(|(z, &inside)| inside && z.norm_sqr() > 0.0)
        });
        if !covered {
            return Err(Error::DegenerateCoils);
        }
        Ok(Self {
            dims,
            sensitivities,
            supports,
        })
    }

    pub fn dims(&self) -> GridDims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.sensitivities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sensitivities.is_empty()
    }

    pub fn sensitivities(&self) -> &[ComplexImage] {
        &self.sensitivities
    }

    pub fn supports(&self) -> &[SupportMask] {
        &self.supports
    }
}
