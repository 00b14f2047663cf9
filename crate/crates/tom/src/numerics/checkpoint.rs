//! Portable checkpoint format.
//!
//! Layout: magic "TOMF", format version (u32 LE), tensor count (u32 LE),
//! then a manifest entry per tensor (name length u32, name bytes, dtype u8
//! with 0 = f64, rank u32, dims u32 each), followed by the raw little-endian
//! value arrays in manifest order. Round-trips are bit-exact.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use super::tensor::Params;

const MAGIC: &[u8; 4] = b"TOMF";
const VERSION: u32 = 1;
const DTYPE_F64: u8 = 0;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic: expected TOMF, found {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    BadVersion(u32),
    #[error("unsupported dtype tag {0}")]
    BadDtype(u8),
    #[error("checkpoint manifest does not match model: {0}")]
    ManifestMismatch(String),
}

pub fn save_checkpoint(params: &Params, path: &Path) -> Result<(), CheckpointError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(params.len() as u32).to_le_bytes())?;
    for t in params.iter() {
        w.write_all(&(t.name.len() as u32).to_le_bytes())?;
        w.write_all(t.name.as_bytes())?;
        w.write_all(&[DTYPE_F64])?;
        w.write_all(&(t.shape.len() as u32).to_le_bytes())?;
        for &d in &t.shape {
            w.write_all(&(d as u32).to_le_bytes())?;
        }
    }
    for t in params.iter() {
        for v in &t.values {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Load values into an existing store; names and shapes must match the
/// store's registration order exactly.
pub fn load_checkpoint(params: &mut Params, path: &Path) -> Result<(), CheckpointError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CheckpointError::BadMagic(magic));
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(CheckpointError::BadVersion(version));
    }
    let count = read_u32(&mut r)? as usize;
    if count != params.len() {
        return Err(CheckpointError::ManifestMismatch(format!(
            "{count} tensors in file, {} in model",
            params.len()
        )));
    }
    let mut manifest = Vec::with_capacity(count);
    for _ in 0..count {
        let name_len = read_u32(&mut r)? as usize;
        let mut name = vec![0u8; name_len];
        r.read_exact(&mut name)?;
        let name = String::from_utf8_lossy(&name).into_owned();
        let mut dtype = [0u8; 1];
        r.read_exact(&mut dtype)?;
        if dtype[0] != DTYPE_F64 {
            return Err(CheckpointError::BadDtype(dtype[0]));
        }
        let rank = read_u32(&mut r)? as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(read_u32(&mut r)? as usize);
        }
        manifest.push((name, shape));
    }
    for (t, (name, shape)) in params.iter_mut().zip(manifest.iter()) {
        if &t.name != name || &t.shape != shape {
            return Err(CheckpointError::ManifestMismatch(format!(
                "expected {} {:?}, file has {} {:?}",
                t.name, t.shape, name, shape
            )));
        }
        let mut buf = [0u8; 8];
        for v in &mut t.values {
            r.read_exact(&mut buf)?;
            *v = f64::from_le_bytes(buf);
        }
    }
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32, CheckpointError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}
