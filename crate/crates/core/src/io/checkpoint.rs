use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::atomic_write;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"RAEW";
const FORMAT_VERSION: u32 = 1;

/// Encoder checkpoint: magic "RAEW", version u32, d_in u64, d u64, then
/// d_in*d f32 weights row-major little-endian.
pub fn save_checkpoint(path: &Path, d_in: usize, d: usize, weights: &[f64]) -> Result<()> {
    if weights.len() != d_in * d {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {d_in}x{d}",
            weights.len()
        )));
    }
    atomic_write(path, |file| {
        let mut w = BufWriter::new(file);
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
        w.write_u64::<LittleEndian>(d_in as u64)?;
        w.write_u64::<LittleEndian>(d as u64)?;
        for &v in weights {
            w.write_f32::<LittleEndian>(v as f32)?;
        }
        w.flush()?;
        Ok(())
    })
}

pub fn load_checkpoint(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
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
            "{}: unsupported checkpoint version {version}",
            path.display()
        )));
    }
    let d_in = r.read_u64::<LittleEndian>()? as usize;
    let d = r.read_u64::<LittleEndian>()? as usize;
    let count = d_in
        .checked_mul(d)
        .ok_or_else(|| Error::Format(format!("{}: {d_in}x{d} overflows", path.display())))?;
    let mut weights = Vec::with_capacity(count);
    for _ in 0..count {
        weights.push(r.read_f32::<LittleEndian>()? as f64);
    }
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        return Err(Error::Format(format!("{}: trailing bytes", path.display())));
    }
    Ok((d_in, d, weights))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_generation_write_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.raew");
        let b = dir.path().join("b.raew");
        let weights: Vec<f64> = (0..12).map(|i| (i as f64) * 0.37 - 1.0).collect();
        save_checkpoint(&a, 3, 4, &weights).unwrap();
        let (d_in, d, loaded) = load_checkpoint(&a).unwrap();
        assert_eq!((d_in, d), (3, 4));
        save_checkpoint(&b, d_in, d, &loaded).unwrap();
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }
}
