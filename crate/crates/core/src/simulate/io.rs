//! Batch files: a little-endian binary layout and CSV.
//!
//! Binary layout: `b"LCLB"`, version `u16`, `t: f64`, `n: u32`, `d: u32`,
//! `n * d` row-major `f64` values, then the seed as `u64`.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::batch::SampleBatch;

pub const MAGIC: &[u8; 4] = b"LCLB";
pub const VERSION: u16 = 1;

pub fn write_binary<T: Real, W: Write>(batch: &SampleBatch<T>, mut w: W) -> Result<()> {
    let n = u32::try_from(batch.n()).map_err(|_| Error::invalid("batch too large for the binary format"))?;
    let d = u32::try_from(batch.dim).map_err(|_| Error::invalid("dimension too large for the binary format"))?;
    let mut buf = Vec::with_capacity(22 + batch.values.len() * 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&batch.t.to_f64_lossy().to_le_bytes());
    buf.extend_from_slice(&n.to_le_bytes());
    buf.extend_from_slice(&d.to_le_bytes());
    for v in &batch.values {
        buf.extend_from_slice(&v.to_f64_lossy().to_le_bytes());
    }
    buf.extend_from_slice(&batch.seed.to_le_bytes());
    w.write_all(&buf)?;
    Ok(())
}

fn take<const N: usize>(bytes: &[u8], pos: &mut usize) -> Result<[u8; N]> {
    let end = *pos + N;
    let chunk = bytes.get(*pos..end).ok_or_else(|| Error::Format("truncated batch file".into()))?;
    *pos = end;
    Ok(chunk.try_into().expect("slice has length N"))
}

pub fn read_binary<T: Real, R: Read>(mut r: R) -> Result<SampleBatch<T>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let mut pos = 0;
    if &take::<4>(&bytes, &mut pos)? != MAGIC {
        return Err(Error::Format("bad magic bytes".into()));
    }
    let version = u16::from_le_bytes(take(&bytes, &mut pos)?);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let t = f64::from_le_bytes(take(&bytes, &mut pos)?);
    let n = u32::from_le_bytes(take(&bytes, &mut pos)?) as usize;
    let d = u32::from_le_bytes(take(&bytes, &mut pos)?) as usize;
    let expected = 22 + n * d * 8 + 8;
    if bytes.len() != expected {
        return Err(Error::Format(format!("expected {expected} bytes, found {}", bytes.len())));
    }
    let mut values = Vec::with_capacity(n * d);
    for _ in 0..n * d {
        values.push(T::lit(f64::from_le_bytes(take(&bytes, &mut pos)?)));
    }
    let seed = u64::from_le_bytes(take(&bytes, &mut pos)?);
    SampleBatch::from_rows(T::lit(t), d, values, seed).map_err(|e| Error::Format(e.to_string()))
}

/// CSV with a header `x0,x1,...` and one row per sample.
pub fn write_csv<T: Real, W: Write>(batch: &SampleBatch<T>, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let header: Vec<String> = (0..batch.dim).map(|j| format!("x{j}")).collect();
    out.write_record(&header).map_err(csv_err)?;
    for row in batch.rows() {
        out.write_record(row.iter().map(|v| format!("{:.16e}", v.to_f64_lossy()))).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Format(format!("{other:?}")),
        }
    } else {
        Error::Format(e.to_string())
    }
}
