use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::atomic_write;
use crate::error::{Error, Result};
use crate::prediction::PredictionSet;

/// Formats with 6 significant digits, `%g`-style: plain decimal for moderate
/// magnitudes, scientific otherwise.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0.00000".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        format!("{:.*}", decimals, x)
    } else {
        format!("{:.5e}", x)
    }
}

/// Writes predictions as TSV: `query_id<TAB>label:score,label:score,...`
/// with scores at 6 significant digits.
pub fn write_predictions_tsv(path: &Path, preds: &PredictionSet) -> Result<()> {
    atomic_write(path, |file| {
        let mut w = BufWriter::new(file);
        for q in 0..preds.n_queries() {
            let entries: Vec<String> = preds
                .list(q)
                .iter()
                .map(|&(label, score)| format!("{label}:{}", format_sig6(score)))
                .collect();
            writeln!(w, "{q}\t{}", entries.join(","))?;
        }
        w.flush()?;
        Ok(())
    })
}

/// Reads a prediction TSV back. Lines must carry consecutive query ids
/// starting from zero.
pub fn read_predictions_tsv(path: &Path) -> Result<PredictionSet> {
    let r = BufReader::new(File::open(path)?);
    let mut lists: Vec<Vec<(usize, f64)>> = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (qid, rest) = line.split_once('\t').ok_or_else(|| {
            Error::Format(format!("{}: line {i}: missing tab", path.display()))
        })?;
        let qid: usize = qid.parse().map_err(|_| {
            Error::Format(format!("{}: line {i}: bad query id '{qid}'", path.display()))
        })?;
        if qid != lists.len() {
            return Err(Error::Format(format!(
                "{}: line {i}: expected query id {}, got {qid}",
                path.display(),
                lists.len()
            )));
        }
        let mut list = Vec::new();
        if !rest.trim().is_empty() {
            for tok in rest.trim().split(',') {
                let (label, score) = tok.split_once(':').ok_or_else(|| {
                    Error::Format(format!(
                        "{}: line {i}: bad entry '{tok}'",
                        path.display()
                    ))
                })?;
                let label: usize = label.parse().map_err(|_| {
                    Error::Format(format!(
                        "{}: line {i}: bad label id '{label}'",
                        path.display()
                    ))
                })?;
                let score: f64 = score.parse().map_err(|_| {
                    Error::Format(format!(
                        "{}: line {i}: bad score '{score}'",
                        path.display()
                    ))
                })?;
                list.push((label, score));
            }
        }
        lists.push(list);
    }
    PredictionSet::from_lists(lists)
}
