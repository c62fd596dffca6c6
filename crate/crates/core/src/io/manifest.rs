use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::atomic_write;
use crate::error::{Error, Result};

/// A referenced file plus its content hash, used to detect mismatched
/// index/embedding combinations before any prediction runs.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct FileStamp {
    pub path: String,
    pub sha256: String,
}

impl FileStamp {
    pub fn of(path: &Path) -> Result<Self> {
        Ok(Self {
            path: path.to_string_lossy().into_owned(),
            sha256: sha256_file(path)?,
        })
    }

    /// Re-hashes the file (resolved against `base` when relative) and
    /// compares against the recorded digest.
    pub fn verify(&self, base: &Path) -> Result<()> {
        let p = Path::new(&self.path);
        let resolved = if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
        let actual = sha256_file(&resolved)?;
        if actual != self.sha256 {
            return Err(Error::Invariant(format!(
                "checksum mismatch for {}: manifest has {}, file has {actual}",
                resolved.display(),
                self.sha256
            )));
        }
        Ok(())
    }
}

/// Index build manifest: dataset shape, build hyper-parameters, and stamps
/// of every artifact the index was built from.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct Manifest {
    pub version: u32,
    pub n_instances: usize,
    pub n_labels: usize,
    pub dim: usize,
    pub m: usize,
    pub ef_construction: usize,
    pub seed: u64,
    pub keys_x: FileStamp,
    pub keys_z: FileStamp,
    pub labels: FileStamp,
    pub index: FileStamp,
}

impl Manifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        atomic_write(path, |file| {
            let json = serde_json::to_string_pretty(self)
                .map_err(|e| Error::Format(e.to_string()))?;
            file.write_all(json.as_bytes())?;
            file.write_all(b"\n")?;
            Ok(())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut s = String::new();
        BufReader::new(File::open(path)?).read_to_string(&mut s)?;
        serde_json::from_str(&s)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }

    /// Verifies every stamped file against its recorded checksum.
    pub fn verify_all(&self, base: &Path) -> Result<()> {
        self.keys_x.verify(base)?;
        self.keys_z.verify(base)?;
        self.labels.verify(base)?;
        self.index.verify(base)?;
        Ok(())
    }
}

/// Hex SHA-256 of a file's contents.
pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 8192];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    Ok(hex)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stamp_detects_modification() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.bin");
        std::fs::write(&path, b"hello").unwrap();
        let stamp = FileStamp::of(&path).unwrap();
        stamp.verify(dir.path()).unwrap();
        std::fs::write(&path, b"tampered").unwrap();
        assert!(matches!(stamp.verify(dir.path()), Err(Error::Invariant(_))));
    }

    #[test]
    fn sha256_matches_known_vector() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("abc.txt");
        std::fs::write(&path, b"abc").unwrap();
        assert_eq!(
            sha256_file(&path).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
