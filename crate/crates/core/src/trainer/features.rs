use crate::error::{Error, Result};
use crate::sparse::LabelMatrix;

/// Sparse feature vector (e.g. a hashed bag of tokens): sorted unique
/// indices with f64 values.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    pub fn new(mut entries: Vec<(usize, f64)>) -> Result<Self> {
        entries.sort_by_key(|&(i, _)| i);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::Format(format!(
                    "duplicate feature index {}",
                    w[0].0
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|&(i, _)| i)
    }
}

/// Desk-scale training set: sparse features for instances and labels (shared
/// feature space, shared encoder) plus the positive-label matrix.
#[derive(Debug, Clone)]
pub struct ToyDataset {
    pub d_in: usize,
    pub instance_features: Vec<SparseVector>,
    pub label_features: Vec<SparseVector>,
    pub labels: LabelMatrix,
}

impl ToyDataset {
    pub fn new(
        d_in: usize,
        instance_features: Vec<SparseVector>,
        label_features: Vec<SparseVector>,
        labels: LabelMatrix,
    ) -> Result<Self> {
        if instance_features.len() != labels.n_rows() {
            return Err(Error::DimensionMismatch(format!(
                "{} instance feature rows vs {} label-matrix rows",
                instance_features.len(),
                labels.n_rows()
            )));
        }
        if label_features.len() != labels.n_labels() {
            return Err(Error::DimensionMismatch(format!(
                "{} label feature rows vs {} labels",
                label_features.len(),
                labels.n_labels()
            )));
        }
        for (i, f) in instance_features.iter().chain(label_features.iter()).enumerate() {
            if let Some(max) = f.max_index() {
                if max >= d_in {
                    return Err(Error::DimensionMismatch(format!(
                        "feature row {i}: index {max} out of range (d_in = {d_in})"
                    )));
                }
            }
        }
        Ok(Self { d_in, instance_features, label_features, labels })
    }

    pub fn n_instances(&self) -> usize {
        self.instance_features.len()
    }

    pub fn n_labels(&self) -> usize {
        self.label_features.len()
    }
}
