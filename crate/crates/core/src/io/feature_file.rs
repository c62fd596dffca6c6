use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::atomic_write;
use crate::error::{Error, Result};
use crate::trainer::SparseVector;

/// Writes sparse feature rows: header `N D`, then one line per row of
/// comma-separated `index:value` pairs (empty line = empty row).
pub fn write_features(path: &Path, d_in: usize, rows: &[SparseVector]) -> Result<()> {
    atomic_write(path, |file| {
        let mut w = BufWriter::new(file);
        writeln!(w, "{} {}", rows.len(), d_in)?;
        for row in rows {
            let toks: Vec<String> = row
                .entries()
                .iter()
                .map(|&(i, v)| format!("{i}:{v}"))
                .collect();
            writeln!(w, "{}", toks.join(","))?;
        }
        w.flush()?;
        Ok(())
    })
}

pub fn read_features(path: &Path) -> Result<(usize, Vec<SparseVector>)> {
    let r = BufReader::new(File::open(path)?);
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format(format!("{}: empty file", path.display())))??;
    let mut parts = header.split_whitespace();
    let n: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format(format!("{}: bad header '{header}'", path.display())))?;
    let d_in: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format(format!("{}: bad header '{header}'", path.display())))?;
    let mut rows = Vec::with_capacity(n);
    for (i, line) in lines.enumerate() {
        let line = line?;
        if i >= n {
            if line.trim().is_empty() {
                continue;
            }
            return Err(Error::Format(format!("{}: more than {n} rows", path.display())));
        }
        let trimmed = line.trim();
        let mut entries = Vec::new();
        if !trimmed.is_empty() {
            for tok in trimmed.split(',') {
                let (idx, val) = tok.split_once(':').ok_or_else(|| {
                    Error::Format(format!("{}: row {i}: bad entry '{tok}'", path.display()))
                })?;
                let idx: usize = idx.trim().parse().map_err(|_| {
                    Error::Format(format!("{}: row {i}: bad index '{idx}'", path.display()))
                })?;
                if idx >= d_in {
                    return Err(Error::Format(format!(
                        "{}: row {i}: index {idx} out of range (D = {d_in})",
                        path.display()
                    )));
                }
                let val: f64 = val.trim().parse().map_err(|_| {
                    Error::Format(format!("{}: row {i}: bad value '{val}'", path.display()))
                })?;
                entries.push((idx, val));
            }
        }
        rows.push(SparseVector::new(entries)?);
    }
    if rows.len() != n {
        return Err(Error::Format(format!(
            "{}: header promised {n} rows, found {}",
            path.display(),
            rows.len()
        )));
    }
    Ok((d_in, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_sparse_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("features.txt");
        let rows = vec![
            SparseVector::new(vec![(0, 1.5), (7, -0.25)]).unwrap(),
            SparseVector::new(vec![]).unwrap(),
            SparseVector::new(vec![(3, 2.0)]).unwrap(),
        ];
        write_features(&path, 8, &rows).unwrap();
        let (d_in, back) = read_features(&path).unwrap();
        assert_eq!(d_in, 8);
        assert_eq!(back, rows);

        write_features(&dir.path().join("f2.txt"), d_in, &back).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(dir.path().join("f2.txt")).unwrap()
        );
    }

    #[test]
    fn rejects_out_of_range_indices() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        std::fs::write(&path, "1 4\n9:1.0\n").unwrap();
        assert!(matches!(read_features(&path), Err(Error::Format(_))));
    }
}
