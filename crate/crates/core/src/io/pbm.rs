//! Plain PBM (P1) for support masks and sampling patterns. `1` marks a
//! pixel inside the FOV or an acquired frequency. Pattern files carry the
//! odd-column decimation factor in a `# m=<factor>` header comment; files
//! without it get the factor inferred from the bits.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{GridDims, SamplingPattern, SupportMask};

pub fn write_pbm<W: Write>(mut w: W, mask: &SupportMask, factor: Option<usize>) -> Result<()> {
    let dims = mask.dims();
    writeln!(w, "P1")?;
    if let Some(m) = factor {
        writeln!(w, "# m={m}")?;
    }
    writeln!(w, "{} {}", dims.n_cols(), dims.n_rows())?;
    let mut line = String::with_capacity(2 * dims.n_cols());
    for row in mask.bits().chunks_exact(dims.n_cols()) {
        line.clear();
        for (i, &b) in row.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            line.push(if b { '1' } else { '0' });
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    factor: Option<usize>,
}

impl Cursor<'_> {
    // Skips whitespace and comments, remembering any `# m=` comment.
    fn skip(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                let end = self.bytes[self.pos..]
                    .iter()
                    .position(|&c| c == b'\n')
                    .map_or(self.bytes.len(), |e| self.pos + e);
                let text = String::from_utf8_lossy(&self.bytes[self.pos + 1..end]);
                if let Some(v) = text.trim().strip_prefix("m=") {
                    self.factor = v.trim().parse().ok();
                }
                self.pos = end;
            } else {
                break;
            }
        }
    }

    fn number(&mut self) -> Result<usize> {
        self.skip();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Format("expected a number in PBM header".into()))
    }
}

/// Returns the mask and the `# m=` factor if the file carries one.
pub fn read_pbm<R: Read>(mut r: R) -> Result<(SupportMask, Option<usize>)> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if !bytes.starts_with(b"P1") {
        return Err(Error::Format("not a plain PBM (P1) file".into()));
    }
    let mut cur = Cursor {
        bytes: &bytes,
        pos: 2,
        factor: None,
    };
    let n_cols = cur.number()?;
    let n_rows = cur.number()?;
    let dims = GridDims::new(n_rows, n_cols).map_err(|e| Error::Format(e.to_string()))?;
    let mut bits = Vec::with_capacity(dims.len());
    while bits.len() < dims.len() {
        cur.skip();
        match cur.bytes.get(cur.pos) {
            Some(b'0') => bits.push(false),
            Some(b'1') => bits.push(true),
            Some(&b) => return Err(Error::Format(format!("unexpected byte {b:#04x} in PBM raster"))),
            None => return Err(Error::Format("PBM raster is truncated".into())),
        }
        cur.pos += 1;
    }
    cur.skip();
    if cur.pos != bytes.len() {
        return Err(Error::Format("trailing data after PBM raster".into()));
    }
    let factor = cur.factor;
    Ok((SupportMask::from_bits(dims, bits)?, factor))
}

pub fn save_mask(path: impl AsRef<Path>, mask: &SupportMask) -> Result<()> {
    write_pbm(BufWriter::new(File::create(path)?), mask, None)
}

pub fn load_mask(path: impl AsRef<Path>) -> Result<SupportMask> {
    Ok(read_pbm(File::open(path)?)?.0)
}

pub fn save_pattern(path: impl AsRef<Path>, pattern: &SamplingPattern) -> Result<()> {
    write_pbm(
        BufWriter::new(File::create(path)?),
        pattern.mask(),
        Some(pattern.subsample_factor_m()),
    )
}

pub fn load_pattern(path: impl AsRef<Path>) -> Result<SamplingPattern> {
    let (mask, factor) = read_pbm(File::open(path)?)?;
    let m = factor.unwrap_or_else(|| SamplingPattern::infer_factor(&mask));
    SamplingPattern::new(mask, m).map_err(|e| Error::Format(e.to_string()))
}
