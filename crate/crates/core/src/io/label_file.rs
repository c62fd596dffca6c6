use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::atomic_write;
use crate::error::{Error, Result};
use crate::sparse::LabelMatrix;

/// Writes the text label format: header `N L`, then one line per row with
/// comma-separated ascending label ids (empty line = no labels).
pub fn write_label_file(path: &Path, y: &LabelMatrix) -> Result<()> {
    atomic_write(path, |file| {
        let mut w = BufWriter::new(file);
        writeln!(w, "{} {}", y.n_rows(), y.n_labels())?;
        for i in 0..y.n_rows() {
            let line: Vec<String> = y.row(i).iter().map(|l| l.to_string()).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        w.flush()?;
        Ok(())
    })
}

pub fn read_label_file(path: &Path) -> Result<LabelMatrix> {
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
    let l: usize = parts
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format(format!("{}: bad header '{header}'", path.display())))?;
    if parts.next().is_some() {
        return Err(Error::Format(format!(
            "{}: header must be exactly 'N L'",
            path.display()
        )));
    }
    let mut rows: Vec<Vec<usize>> = Vec::with_capacity(n);
    for (i, line) in lines.enumerate() {
        let line = line?;
        if i >= n {
            if line.trim().is_empty() {
                continue;
            }
            return Err(Error::Format(format!(
                "{}: more than {n} label rows",
                path.display()
            )));
        }
        let trimmed = line.trim();
        if trimmed.is_empty() {
            rows.push(Vec::new());
            continue;
        }
        let mut ids = Vec::new();
        for tok in trimmed.split(',') {
            let id: usize = tok.trim().parse().map_err(|_| {
                Error::Format(format!("{}: row {i}: bad label id '{tok}'", path.display()))
            })?;
            ids.push(id);
        }
        rows.push(ids);
    }
    if rows.len() != n {
        return Err(Error::Format(format!(
            "{}: header promised {n} rows, found {}",
            path.display(),
            rows.len()
        )));
    }
    LabelMatrix::from_rows(l, &rows)
}
