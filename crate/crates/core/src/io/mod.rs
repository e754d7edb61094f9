//! File formats: CFOV1 complex rasters, plain PBM masks and patterns, and
//! 16-bit PGM magnitude images.

pub mod cfov;
pub mod pbm;
pub mod pgm;

pub use cfov::{kspace_from_raster, kspace_to_raster, load_cfov, read_cfov, save_cfov, write_cfov, Raster};
pub use pbm::{load_mask, load_pattern, read_pbm, save_mask, save_pattern, write_pbm};
pub use pgm::{centered, magnitude_levels, save_pgm, write_pgm16};
