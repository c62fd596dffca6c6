use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::atomic_write;
use crate::dense::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAGIC: &[u8; 4] = b"RAEE";
const FORMAT_VERSION: u32 = 1;

/// Writes an embedding matrix: magic "RAEE", version u32, rows u64, dim u64,
/// then rows*dim f32 little-endian values in row-major order.
pub fn write_embeddings<T: Scalar>(path: &Path, m: &EmbeddingMatrix<T>) -> Result<()> {
    atomic_write(path, |file| {
        let mut w = BufWriter::new(file);
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
        w.write_u64::<LittleEndian>(m.rows() as u64)?;
        w.write_u64::<LittleEndian>(m.dim() as u64)?;
        for &v in m.data() {
            w.write_f32::<LittleEndian>(v.as_f64() as f32)?;
        }
        w.flush()?;
        Ok(())
    })
}

/// Reads an embedding file, re-normalizing rows (external files carry 32-bit
/// rounding; a zero row is still an error).
pub fn read_embeddings<T: Scalar>(path: &Path) -> Result<EmbeddingMatrix<T>> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!(
            "{}: bad magic {:?}, expected {:?}",
            path.display(),
            magic,
            MAGIC
        )));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "{}: unsupported embedding format version {version}",
            path.display()
        )));
    }
    let rows = r.read_u64::<LittleEndian>()? as usize;
    let dim = r.read_u64::<LittleEndian>()? as usize;
    let count = rows.checked_mul(dim).ok_or_else(|| {
        Error::Format(format!("{}: {rows}x{dim} overflows", path.display()))
    })?;
    let mut data = Vec::with_capacity(count);
    for _ in 0..count {
        data.push(T::from_f64_lossy(r.read_f32::<LittleEndian>()? as f64));
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Format(format!(
            "{}: trailing bytes after {count} values",
            path.display()
        )));
    }
    EmbeddingMatrix::normalize_rows(rows, dim, data)
}
