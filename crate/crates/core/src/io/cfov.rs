//! CFOV1 layout, all little-endian:
//!
//! ```text
//! magic    8 bytes  "CFOV" 01 00 00 00
//! n_rows   u32
//! n_cols   u32
//! n_coils  u32
//! flags    u32      bit 0: k-space data; other bits must be zero
//! payload  n_coils * n_rows * n_cols * (re f64, im f64), coil-major, row-major
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexImage, GridDims, KSpaceData, SamplingPattern};

pub const MAGIC: [u8; 8] = *b"CFOV\x01\x00\x00\x00";
const FLAG_KSPACE: u32 = 1;

/// One or more complex layers (coils) on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub dims: GridDims,
    pub is_kspace: bool,
    pub layers: Vec<ComplexImage>,
}

impl Raster {
    pub fn image(img: ComplexImage) -> Self {
        Self {
            dims: img.dims(),
            is_kspace: false,
            layers: vec![img],
        }
    }

    pub fn images(layers: Vec<ComplexImage>) -> Result<Self> {
        let dims = layers.first().ok_or(Error::EmptyInput)?.dims();
        if let Some(l) = layers.iter().find(|l| l.dims() != dims) {
            return Err(Error::DimMismatch(dims, l.dims()));
        }
        Ok(Self {
            dims,
            is_kspace: false,
            layers,
        })
    }
}

pub fn write_cfov<W: Write>(mut w: W, raster: &Raster) -> Result<()> {
    let dims = raster.dims;
    w.write_all(&MAGIC)?;
    for v in [
        dims.n_rows() as u32,
        dims.n_cols() as u32,
        raster.layers.len() as u32,
        if raster.is_kspace { FLAG_KSPACE } else { 0 },
    ] {
        w.write_all(&v.to_le_bytes())?;
    }
    for layer in &raster.layers {
        if layer.dims() != dims {
            return Err(Error::DimMismatch(dims, layer.dims()));
        }
        for z in layer.data() {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u32::from_le_bytes(b))
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("CFOV1 file is truncated".into())
    } else {
        Error::Io(e)
    }
}

pub fn read_cfov<R: Read>(mut r: R) -> Result<Raster> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(truncated)?;
    if magic != MAGIC {
        return Err(Error::Format("bad CFOV1 magic".into()));
    }
    let n_rows = read_u32(&mut r)? as usize;
    let n_cols = read_u32(&mut r)? as usize;
    let n_coils = read_u32(&mut r)? as usize;
    let flags = read_u32(&mut r)?;
    if flags & !FLAG_KSPACE != 0 {
        return Err(Error::Format(format!("unknown CFOV1 flags {flags:#x}")));
    }
    if n_coils == 0 {
        return Err(Error::Format("CFOV1 file has no layers".into()));
    }
    let dims = GridDims::new(n_rows, n_cols).map_err(|e| Error::Format(e.to_string()))?;
    let mut buf = vec![0u8; dims.len() * 16];
    let mut layers = Vec::with_capacity(n_coils);
    for _ in 0..n_coils {
        r.read_exact(&mut buf).map_err(truncated)?;
        let data = buf
            .chunks_exact(16)
            .map(|b| {
                let re = f64::from_le_bytes(b[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(b[8..].try_into().expect("8 bytes"));
                Complex64::new(re, im)
            })
            .collect();
        layers.push(ComplexImage::from_vec(dims, data).map_err(|e| Error::Format(e.to_string()))?);
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after CFOV1 payload".into()));
    }
    Ok(Raster {
        dims,
        is_kspace: flags & FLAG_KSPACE != 0,
        layers,
    })
}

pub fn save_cfov(path: impl AsRef<Path>, raster: &Raster) -> Result<()> {
    write_cfov(BufWriter::new(File::create(path)?), raster)
}

pub fn load_cfov(path: impl AsRef<Path>) -> Result<Raster> {
    read_cfov(BufReader::new(File::open(path)?))
}

/// Full-grid k-space raster with unacquired entries written as zero.
pub fn kspace_to_raster(data: &KSpaceData) -> Raster {
    Raster {
        dims: data.pattern().dims(),
        is_kspace: true,
        layers: (0..data.coils()).map(|j| data.zero_filled(j)).collect(),
    }
}

/// Pick the acquired entries out of a k-space raster; the rest are ignored.
pub fn kspace_from_raster(raster: &Raster, pattern: &SamplingPattern) -> Result<KSpaceData> {
    if !raster.is_kspace {
        return Err(Error::Format("raster is not flagged as k-space".into()));
    }
    if raster.dims != pattern.dims() {
        return Err(Error::DimMismatch(raster.dims, pattern.dims()));
    }
    let samples = raster.layers.iter().map(|l| pattern.mask().gather(l)).collect::<Result<Vec<_>>>()?;
    KSpaceData::new(pattern.clone(), samples)
}
