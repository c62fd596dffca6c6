use crate::error::{Error, Result};

/// Sparse binary instance-to-label matrix in CSR layout.
///
/// Values are implicitly 1.0. Rows with zero entries are permitted
/// (real extreme-classification data contains unlabeled instances).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMatrix {
    n_rows: usize,
    n_labels: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
}

impl LabelMatrix {
    /// Builds from per-row label id lists. Ids must be strictly ascending
    /// within each row and below `n_labels`.
    pub fn from_rows(n_labels: usize, rows: &[Vec<usize>]) -> Result<Self> {
        let mut row_offsets = Vec::with_capacity(rows.len() + 1);
        let mut col_indices = Vec::new();
        row_offsets.push(0);
        for (r, labels) in rows.iter().enumerate() {
            for (j, &l) in labels.iter().enumerate() {
                if l >= n_labels {
                    return Err(Error::Format(format!(
                        "row {r}: label id {l} out of range (L = {n_labels})"
                    )));
                }
                if j > 0 && labels[j - 1] >= l {
                    return Err(Error::Format(format!(
                        "row {r}: label ids must be strictly ascending"
                    )));
                }
            }
            col_indices.extend_from_slice(labels);
            row_offsets.push(col_indices.len());
        }
        Ok(Self { n_rows: rows.len(), n_labels, row_offsets, col_indices })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_labels(&self) -> usize {
        self.n_labels
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    /// Label ids of row `i`, ascending.
    pub fn row(&self, i: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[i]..self.row_offsets[i + 1]]
    }

    pub fn contains(&self, row: usize, label: usize) -> bool {
        self.row(row).binary_search(&label).is_ok()
    }

    /// Column sums: how many rows carry each label.
    pub fn label_frequencies(&self) -> Vec<usize> {
        let mut freq = vec![0usize; self.n_labels];
        for &l in &self.col_indices {
            freq[l] += 1;
        }
        freq
    }

    /// Reorders rows by `perm`, where output row `i` is input row `perm[i]`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n_rows {
            return Err(Error::DimensionMismatch(format!(
                "permutation of length {} over {} rows",
                perm.len(),
                self.n_rows
            )));
        }
        let rows: Vec<Vec<usize>> = perm.iter().map(|&p| self.row(p).to_vec()).collect();
        Self::from_rows(self.n_labels, &rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_rows() {
        let y = LabelMatrix::from_rows(5, &[vec![0, 3], vec![], vec![1, 2, 4]]).unwrap();
        assert_eq!(y.n_rows(), 3);
        assert_eq!(y.row(0), &[0, 3]);
        assert_eq!(y.row(1), &[] as &[usize]);
        assert_eq!(y.row(2), &[1, 2, 4]);
        assert_eq!(y.nnz(), 5);
        assert!(y.contains(0, 3));
        assert!(!y.contains(1, 0));
    }

    #[test]
    fn rejects_out_of_range_and_unsorted() {
        assert!(LabelMatrix::from_rows(3, &[vec![3]]).is_err());
        assert!(LabelMatrix::from_rows(3, &[vec![1, 1]]).is_err());
        assert!(LabelMatrix::from_rows(3, &[vec![2, 0]]).is_err());
    }

    #[test]
    fn frequencies_count_columns() {
        let y = LabelMatrix::from_rows(3, &[vec![0], vec![0, 2], vec![0]]).unwrap();
        assert_eq!(y.label_frequencies(), vec![3, 0, 2]);
    }
}
