//! Binary tensor files.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "TT3\0"
//!      4     2  version, u16 LE (1)
//!      6     4  n1, u32 LE
//!     10     4  n2, u32 LE
//!     14     4  n3, u32 LE
//!     18  8·n   entries, f64 LE, frontal-slice-major
//! ```

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tensor::{Dims3, Tensor3};

pub const MAGIC: [u8; 4] = *b"TT3\0";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 18;

pub fn encode(t: &Tensor3) -> Result<Vec<u8>> {
    let d = t.dims();
    let extent = |n: usize| {
        u32::try_from(n).map_err(|_| Error::Format(format!("extent {n} does not fit in u32")))
    };
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * d.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for n in [d.n1, d.n2, d.n3] {
        out.extend_from_slice(&extent(n)?.to_le_bytes());
    }
    for v in t.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<Tensor3> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "{} bytes is shorter than the header",
            bytes.len()
        )));
    }
    if bytes[..4] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let u32_at =
        |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().expect("4 bytes")) as usize;
    let (n1, n2, n3) = (u32_at(6), u32_at(10), u32_at(14));
    let dims = Dims3::new(n1, n2, n3).map_err(|e| Error::Format(e.to_string()))?;
    let expected = n1
        .checked_mul(n2)
        .and_then(|v| v.checked_mul(n3))
        .and_then(|v| v.checked_mul(8))
        .and_then(|v| v.checked_add(HEADER_LEN));
    if expected != Some(bytes.len()) {
        return Err(Error::Format(format!(
            "payload of {} bytes does not match extents {dims}",
            bytes.len() - HEADER_LEN
        )));
    }
    let data: Vec<f64> = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Format("non-finite entry".into()));
    }
    Tensor3::from_vec(dims, data)
}

pub fn write_tensor(path: impl AsRef<Path>, t: &Tensor3) -> Result<()> {
    fs::write(path, encode(t)?)?;
    Ok(())
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<Tensor3> {
    decode(&fs::read(path)?)
}
