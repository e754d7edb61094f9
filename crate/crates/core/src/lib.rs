//! Reduced Fourier sampling for non-rectangular fields of view.
//!
//! A field of view given as a binary mask is split into an outer region,
//! recoverable from the even k-space columns alone, and an inner band that
//! additionally needs the odd columns on a vertically decimated lattice.
//! The crate builds that reduced pattern and reconstructs images from it
//! either directly ([`direct`]) or by least squares over the in-FOV pixels
//! ([`mbr`]), including multi-coil acquisitions.
//!
//! With the default `parallel` feature, transforms and per-coil work run on
//! rayon; disabling it gives an identical sequential build.
//!
//! ```
//! use fovkit::*;
//!
//! # fn main() -> fovkit::Result<()> {
//! let n = 64;
//! let dims = GridDims::new(n, n)?;
//! let fov = SupportMask::from_fn(dims, |r, c| !(r < n / 2 && c >= n / 2));
//!
//! let dec = decompose(&fov)?;
//! let pattern = reduced_pattern(&dec);
//! assert!(burden(&pattern).equals_fraction(3, 4));
//!
//! let img = ComplexImage::from_fn(dims, |r, c| if fov.get(r, c) { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
//! let data = simulate_kspace(&img, &pattern, None, 0.0, 0)?;
//! let rec = recon_direct(&data, &dec)?;
//!
//! let model = ForwardModel::new(fov.clone(), pattern)?;
//! let (x, report) = solve_lsqr(&model, data.coil(0), 1e-8, 500)?;
//! let rec_lsqr = fov.scatter(&x)?;
//! assert_eq!(report.stop_reason, StopReason::Tolerance);
//! assert!(metrics(&rec_lsqr, &rec, None)?.rel_l2 < 1e-6);
//! # Ok(())
//! # }
//! ```

pub mod coils;
pub mod decomposition;
pub mod direct;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod io;
pub mod mbr;
pub mod metrics;
mod par;
pub mod pattern;
pub mod phantom;
pub mod simulate;

pub use num_complex::Complex64;

pub use coils::{coil_support, estimate_sensitivities, roemer_combine};
pub use decomposition::{decompose, overlap_rows, Decomposition, RowInterval};
pub use direct::{recon_direct, recon_direct_parallel, recon_outer};
pub use error::{Error, Result};
pub use fourier::{fft2, ifft2, nudft_adjoint, nudft_forward, spectrum_on_inner_grid, FreqList};
pub use grid::{CoilSet, ComplexImage, GridDims, KSpaceData, SamplingPattern, SupportMask};
pub use mbr::{solve_lsqr, solve_parallel, solve_pocs, ForwardModel, LinearOperator, SolveReport, StopReason};
pub use metrics::{metrics, Metrics};
pub use par::configure_threads;
pub use pattern::{burden, full_pattern, pattern_for_coils, reduced_pattern, Burden};
pub use phantom::{render_phantom, PhantomSpec};
pub use simulate::simulate_kspace;
