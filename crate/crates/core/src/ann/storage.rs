use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::AnnIndex;
use crate::error::{Error, Result};
use crate::io::atomic_write;

const MAGIC: &[u8; 4] = b"RAEI";
const FORMAT_VERSION: u32 = 1;

impl AnnIndex {
    /// Serializes the graph: magic, format version u32, node_count u64,
    /// m u32, entry_point u64, then per node a level count and each level's
    /// adjacency list as u64 little-endian arrays.
    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(FORMAT_VERSION)?;
        w.write_u64::<LittleEndian>(self.node_count() as u64)?;
        w.write_u32::<LittleEndian>(self.m as u32)?;
        w.write_u64::<LittleEndian>(self.entry_point as u64)?;
        for levels in &self.adjacency {
            w.write_u64::<LittleEndian>(levels.len() as u64)?;
            for list in levels {
                w.write_u64::<LittleEndian>(list.len() as u64)?;
                for &nb in list {
                    w.write_u64::<LittleEndian>(nb as u64)?;
                }
            }
        }
        Ok(())
    }

    /// Reads a serialized graph and validates every structural invariant.
    ///
    /// The build seed is not part of the format; loaded indexes report 0.
    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!(
                "bad magic {:?}, expected {:?}",
                magic, MAGIC
            )));
        }
        let version = r.read_u32::<LittleEndian>()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported index format version {version}"
            )));
        }
        let node_count = r.read_u64::<LittleEndian>()? as usize;
        let m = r.read_u32::<LittleEndian>()? as usize;
        let entry_point = r.read_u64::<LittleEndian>()? as usize;
        let mut adjacency = Vec::with_capacity(node_count);
        for _ in 0..node_count {
            let n_levels = r.read_u64::<LittleEndian>()? as usize;
            if n_levels == 0 {
                return Err(Error::Format("node with zero levels".into()));
            }
            let mut levels = Vec::with_capacity(n_levels);
            for _ in 0..n_levels {
                let len = r.read_u64::<LittleEndian>()? as usize;
                let mut list = Vec::with_capacity(len);
                for _ in 0..len {
                    list.push(r.read_u64::<LittleEndian>()? as usize);
                }
                levels.push(list);
            }
            adjacency.push(levels);
        }
        let index = AnnIndex { m, entry_point, build_seed: 0, adjacency };
        index.validate()?;
        Ok(index)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        atomic_write(path, |file| {
            let mut w = BufWriter::new(file);
            self.write_to(&mut w)?;
            w.flush()?;
            Ok(())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        Self::read_from(&mut r)
    }
}

#[cfg(test)]
mod tests {
    use super::super::build_index;
    use super::*;
    use crate::dense::EmbeddingMatrix;

    fn sample_index() -> (EmbeddingMatrix<f64>, AnnIndex) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let data: Vec<f64> = (0..50 * 6).map(|_| rng.random::<f64>() - 0.5).collect();
        let keys = EmbeddingMatrix::normalize_rows(50, 6, data).unwrap();
        let index = build_index(&keys, 6, 24, 4).unwrap();
        (keys, index)
    }

    #[test]
    fn round_trip_preserves_graph() {
        let (_, index) = sample_index();
        let mut buf = Vec::new();
        index.write_to(&mut buf).unwrap();
        let loaded = AnnIndex::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(loaded.adjacency, index.adjacency);
        assert_eq!(loaded.entry_point(), index.entry_point());
        assert_eq!(loaded.max_degree(), index.max_degree());

        // Writing the loaded graph again is byte-identical.
        let mut buf2 = Vec::new();
        loaded.write_to(&mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn rejects_corrupted_payloads() {
        let (_, index) = sample_index();
        let mut buf = Vec::new();
        index.write_to(&mut buf).unwrap();

        let mut bad_magic = buf.clone();
        bad_magic[0] = b'X';
        assert!(matches!(
            AnnIndex::read_from(&mut bad_magic.as_slice()),
            Err(Error::Format(_))
        ));

        // Point the entry id out of range.
        let mut bad_entry = buf.clone();
        bad_entry[20] = 0xFF;
        bad_entry[21] = 0xFF;
        assert!(AnnIndex::read_from(&mut bad_entry.as_slice()).is_err());

        let mut truncated = buf.clone();
        truncated.truncate(buf.len() - 3);
        assert!(AnnIndex::read_from(&mut truncated.as_slice()).is_err());
    }
}
