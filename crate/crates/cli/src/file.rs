//! Binary sketch container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic      "CMMS"
//! version    u16   (currently 1)
//! mode       u8    0 = plain, 1 = recoverable
//! signs      u8    independence of the sign hashes: 2 or 4
//! n1 n2 n3   u64 x 3
//! b d        u32 x 2
//! seed       u64
//! -- recoverable only --
//! l_r l_c    u32 x 2      row / column code lengths
//! delta      u32 x 2      numerator, denominator
//! code seeds u64 x 2      row, column
//! -- payload --
//! f64 x d*b               (plain)
//! f64 x d*(1+l_r+l_c)*b   (recoverable)
//! ```

use std::io::Write;

use cmm_core::hashing::SignIndependence;
use cmm_core::recovery::{Code, RecoverableSketch};
use cmm_core::sketch::{SketchParams, SketchSet};

pub const MAGIC: &[u8; 4] = b"CMMS";
pub const VERSION: u16 = 1;

const MODE_PLAIN: u8 = 0;
const MODE_RECOVERABLE: u8 = 1;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("not a sketch file (bad magic)")]
    BadMagic,
    #[error("unsupported format version {0} (expected {VERSION})")]
    Version(u16),
    #[error("file truncated: needed {needed} more bytes at offset {offset}")]
    Truncated { offset: usize, needed: usize },
    #[error("{0} trailing bytes after the payload")]
    Trailing(usize),
    #[error("invalid header: {0}")]
    Header(String),
    #[error(transparent)]
    Core(#[from] cmm_core::Error),
}

/// A sketch as stored on disk.
#[derive(Clone, Debug, PartialEq)]
pub enum StoredSketch {
    Plain(SketchSet),
    Recoverable(RecoverableSketch),
}

impl StoredSketch {
    pub fn dims(&self) -> (usize, usize, usize) {
        match self {
            StoredSketch::Plain(s) => s.dims(),
            StoredSketch::Recoverable(s) => s.dims(),
        }
    }

    pub fn params(&self) -> &SketchParams {
        match self {
            StoredSketch::Plain(s) => s.params(),
            StoredSketch::Recoverable(s) => s.params(),
        }
    }

    pub fn mode_name(&self) -> &'static str {
        match self {
            StoredSketch::Plain(_) => "plain",
            StoredSketch::Recoverable(_) => "recoverable",
        }
    }

    fn coefficients(&self) -> &[f64] {
        match self {
            StoredSketch::Plain(s) => s.all_coefficients(),
            StoredSketch::Recoverable(s) => s.all_coefficients(),
        }
    }
}

fn u32_field(name: &str, v: usize) -> Result<u32, FormatError> {
    u32::try_from(v).map_err(|_| FormatError::Header(format!("{name} = {v} does not fit in 32 bits")))
}

/// Serializes `s`. Codes must carry their construction seed.
pub fn to_bytes(s: &StoredSketch) -> Result<Vec<u8>, FormatError> {
    let (n1, n2, n3) = s.dims();
    let p = s.params();
    let coeffs = s.coefficients();
    let mut out = Vec::with_capacity(96 + 8 * coeffs.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(match s {
        StoredSketch::Plain(_) => MODE_PLAIN,
        StoredSketch::Recoverable(_) => MODE_RECOVERABLE,
    });
    out.push(p.signs().k() as u8);
    for n in [n1, n2, n3] {
        out.extend_from_slice(&(n as u64).to_le_bytes());
    }
    out.extend_from_slice(&u32_field("buckets", p.buckets())?.to_le_bytes());
    out.extend_from_slice(&u32_field("reps", p.reps())?.to_le_bytes());
    out.extend_from_slice(&p.seed().to_le_bytes());
    if let StoredSketch::Recoverable(r) = s {
        let (rc, cc) = (r.row_code(), r.col_code());
        out.extend_from_slice(&u32_field("row code length", rc.len())?.to_le_bytes());
        out.extend_from_slice(&u32_field("column code length", cc.len())?.to_le_bytes());
        if rc.delta() != cc.delta() {
            return Err(FormatError::Header("row and column codes use different delta".into()));
        }
        let (num, den) = rc.delta();
        out.extend_from_slice(&num.to_le_bytes());
        out.extend_from_slice(&den.to_le_bytes());
        for code in [rc, cc] {
            let seed = code
                .seed()
                .ok_or_else(|| FormatError::Header("code was not built from a seed".into()))?;
            out.extend_from_slice(&seed.to_le_bytes());
        }
    }
    for c in coeffs {
        out.extend_from_slice(&c.to_le_bytes());
    }
    Ok(out)
}

pub fn write_to<W: Write>(mut w: W, s: &StoredSketch) -> std::io::Result<()> {
    let bytes = to_bytes(s).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidInput, e))?;
    w.write_all(&bytes)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        let rest = self.buf.len() - self.pos;
        if rest < n {
            return Err(FormatError::Truncated {
                offset: self.pos,
                needed: n - rest,
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, FormatError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn usize(&mut self) -> Result<usize, FormatError> {
        let v = self.u64()?;
        usize::try_from(v).map_err(|_| FormatError::Header(format!("dimension {v} is too large")))
    }
}

pub fn from_bytes(buf: &[u8]) -> Result<StoredSketch, FormatError> {
    let mut c = Cursor { buf, pos: 0 };
    if c.take(4)? != MAGIC {
        return Err(FormatError::BadMagic);
    }
    let version = c.u16()?;
    if version != VERSION {
        return Err(FormatError::Version(version));
    }
    let mode = c.u8()?;
    let signs = match c.u8()? {
        2 => SignIndependence::Pairwise,
        4 => SignIndependence::FourWise,
        k => return Err(FormatError::Header(format!("unsupported sign independence {k}"))),
    };
    let dims = (c.usize()?, c.usize()?, c.usize()?);
    let (b, d) = (c.u32()? as usize, c.u32()? as usize);
    if !b.is_power_of_two() {
        return Err(FormatError::Header(format!("bucket count {b} is not a power of two")));
    }
    let params = SketchParams::new(b, d, c.u64()?)?.with_signs(signs);
    let codes = match mode {
        MODE_PLAIN => None,
        MODE_RECOVERABLE => {
            let (lr, lc) = (c.u32()? as usize, c.u32()? as usize);
            let (num, den) = (c.u32()?, c.u32()?);
            let (rs, cs) = (c.u64()?, c.u64()?);
            Some((
                Code::from_seed(dims.0, lr, num, den, rs)?,
                Code::from_seed(dims.2, lc, num, den, cs)?,
            ))
        }
        m => return Err(FormatError::Header(format!("unknown mode {m}"))),
    };
    let blocks = codes.as_ref().map_or(1, |(r, c)| 1 + r.len() + c.len());
    let count = d
        .checked_mul(blocks)
        .and_then(|x| x.checked_mul(b))
        .ok_or_else(|| FormatError::Header("payload size overflows".into()))?;
    let rest = buf.len() - c.pos;
    let want = count
        .checked_mul(8)
        .ok_or_else(|| FormatError::Header("payload size overflows".into()))?;
    if rest < want {
        return Err(FormatError::Truncated {
            offset: c.pos,
            needed: want - rest,
        });
    }
    if rest > want {
        return Err(FormatError::Trailing(rest - want));
    }
    let coeffs: Vec<f64> = buf[c.pos..]
        .chunks_exact(8)
        .map(|w| f64::from_le_bytes(w.try_into().unwrap()))
        .collect();
    Ok(match codes {
        None => StoredSketch::Plain(SketchSet::from_parts(dims, params, coeffs)?),
        Some((rc, cc)) => StoredSketch::Recoverable(RecoverableSketch::from_parts(dims, params, rc, cc, coeffs)?),
    })
}
