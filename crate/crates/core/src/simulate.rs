//! Exact k-space simulation with seeded Gaussian noise.
//!
//! Noise comes from ChaCha20 seeded through `SeedableRng::seed_from_u64`,
//! drawn coil by coil in the pattern's row-major sample order, real part
//! before imaginary part.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::fourier::fft2;
use crate::grid::{CoilSet, ComplexImage, KSpaceData, SamplingPattern};
use crate::par;

/// Samples `fft2(sigma_j * img)` on the pattern for every coil (a single
/// unit coil when `coils` is `None`), scaled so that the largest spectral
/// magnitude over all coils is 1, plus i.i.d. complex Gaussian noise with
/// standard deviation `noise_sigma` per component.
pub fn simulate_kspace(
    img: &ComplexImage,
    pattern: &SamplingPattern,
    coils: Option<&CoilSet>,
    noise_sigma: f64,
    seed: u64,
) -> Result<KSpaceData> {
    let dims = img.dims();
    if pattern.dims() != dims {
        return Err(Error::DimMismatch(dims, pattern.dims()));
    }
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!("noise sigma {noise_sigma}")));
    }
    let spectra = match coils {
        None => vec![fft2(img)],
        Some(set) => {
            if set.dims() != dims {
                return Err(Error::DimMismatch(dims, set.dims()));
            }
            par::map(set.sensitivities(), |s| fft2(&s.hadamard(img).expect("dims checked")))
        }
    };
    let peak = spectra.iter().map(ComplexImage::max_abs).fold(0.0, f64::max);
    let normalization = if peak > 0.0 { 1.0 / peak } else { 1.0 };

    let noise = Normal::new(0.0, noise_sigma).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(spectra.len());
    for spec in &spectra {
        let mut coil = pattern.mask().gather(spec)?;
        for z in &mut coil {
            *z *= normalization;
            if noise_sigma > 0.0 {
                let re = noise.sample(&mut rng);
                let im = noise.sample(&mut rng);
                *z += Complex64::new(re, im);
            }
        }
        samples.push(coil);
    }
    KSpaceData::with_normalization(pattern.clone(), samples, normalization)
}
