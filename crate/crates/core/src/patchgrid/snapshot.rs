//! `WGRD` grid snapshots: magic, `u32` version (1), `u32` ndims,
//! `u32` dims, `u32` components, then `f64` values component-major and
//! row-major within a component. Little-endian.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::field::Field;

pub const MAGIC: &[u8; 4] = b"WGRD";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not a WGRD snapshot")]
    BadMagic,
    #[error("unsupported WGRD version {0}")]
    Version(u32),
    #[error("bad snapshot header: {0}")]
    Header(String),
    #[error("components differ in shape")]
    MixedShapes,
}

pub fn write_wgrd(mut w: impl Write, components: &[Field]) -> Result<(), SnapshotError> {
    let first = components.first().ok_or_else(|| SnapshotError::Header("no components".into()))?;
    if components.iter().any(|c| c.dims() != first.dims()) {
        return Err(SnapshotError::MixedShapes);
    }
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(first.ndim() as u32).to_le_bytes())?;
    for &d in first.dims() {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    w.write_all(&(components.len() as u32).to_le_bytes())?;
    for c in components {
        for v in c.data() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_u32(r: &mut impl Read) -> Result<u32, SnapshotError> {
    let mut b = [0; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_wgrd(mut r: impl Read) -> Result<Vec<Field>, SnapshotError> {
    let mut magic = [0; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let version = read_u32(&mut r)?;
    if version != VERSION {
        return Err(SnapshotError::Version(version));
    }
    let ndims = read_u32(&mut r)? as usize;
    if ndims == 0 || ndims > 16 {
        return Err(SnapshotError::Header(format!("rank {ndims}")));
    }
    let dims = (0..ndims)
        .map(|_| read_u32(&mut r).map(|d| d as usize))
        .collect::<Result<Vec<_>, _>>()?;
    let count = dims
        .iter()
        .try_fold(1usize, |a, &d| a.checked_mul(d))
        .filter(|&c| c > 0)
        .ok_or_else(|| SnapshotError::Header(format!("dims {dims:?}")))?;
    let components = read_u32(&mut r)? as usize;
    if components == 0 {
        return Err(SnapshotError::Header("zero components".into()));
    }
    let mut out = Vec::with_capacity(components);
    let mut buf = vec![0u8; 8 * count];
    for _ in 0..components {
        r.read_exact(&mut buf)?;
        let data = buf
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect();
        out.push(Field::from_vec(&dims, data).map_err(|e| SnapshotError::Header(e.to_string()))?);
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(SnapshotError::Header("trailing bytes".into()));
    }
    Ok(out)
}

pub fn write_wgrd_file(path: &Path, components: &[Field]) -> Result<(), SnapshotError> {
    write_wgrd(BufWriter::new(File::create(path)?), components)
}

pub fn read_wgrd_file(path: &Path) -> Result<Vec<Field>, SnapshotError> {
    read_wgrd(BufReader::new(File::open(path)?))
}

/// Human-readable 2-D grid: one line per row, comma separated.
pub fn write_csv_grid(mut w: impl Write, field: &Field) -> io::Result<()> {
    let cols = *field.dims().last().unwrap_or(&1);
    for row in field.data().chunks(cols) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()
}
