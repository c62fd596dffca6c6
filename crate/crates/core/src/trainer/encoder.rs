use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::features::SparseVector;
use crate::dense::EmbeddingMatrix;
use crate::error::{Error, Result};

/// Linear shared encoder over sparse features: `encode(v) = normalize(W^T v)`
/// with `W` of shape `d_in x d`, row-major. Outputs are always unit-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyEncoder {
    d_in: usize,
    d: usize,
    weights: Vec<f64>,
}

impl ToyEncoder {
    pub fn new(d_in: usize, d: usize, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != d_in * d {
            return Err(Error::DimensionMismatch(format!(
                "weight buffer of {} values for {d_in}x{d}",
                weights.len()
            )));
        }
        Ok(Self { d_in, d, weights })
    }

    /// Gaussian init scaled by 1/sqrt(d_in), seeded.
    pub fn random_init(d_in: usize, d: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0 / (d_in as f64).sqrt()).unwrap();
        let weights = (0..d_in * d).map(|_| normal.sample(&mut rng)).collect();
        Self { d_in, d, weights }
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    fn weight_row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.d..(i + 1) * self.d]
    }

    /// Pre-normalization projection `W^T v`.
    pub fn project(&self, v: &SparseVector) -> Vec<f64> {
        let mut u = vec![0.0; self.d];
        for &(idx, val) in v.entries() {
            let row = self.weight_row(idx);
            for (uj, wj) in u.iter_mut().zip(row) {
                *uj += val * wj;
            }
        }
        u
    }

    /// Unit-norm embedding; errors if the projection is (near) zero.
    pub fn encode(&self, v: &SparseVector) -> Result<Vec<f64>> {
        let (e, _) = self.encode_with_norm(v)?;
        Ok(e)
    }

    /// Embedding plus the pre-normalization norm (needed to backpropagate
    /// through the projection onto the sphere).
    pub fn encode_with_norm(&self, v: &SparseVector) -> Result<(Vec<f64>, f64)> {
        let mut u = self.project(v);
        let norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(Error::DegenerateEncoding(format!(
                "sparse input with {} entries",
                v.entries().len()
            )));
        }
        for x in u.iter_mut() {
            *x /= norm;
        }
        Ok((u, norm))
    }

    /// Encodes a batch of feature rows into an embedding matrix.
    pub fn encode_all(&self, rows: &[SparseVector]) -> Result<EmbeddingMatrix<f64>> {
        let mut data = Vec::with_capacity(rows.len() * self.d);
        for v in rows {
            data.extend(self.encode(v)?);
        }
        EmbeddingMatrix::normalize_rows(rows.len(), self.d, data)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::io::save_checkpoint(path, self.d_in, self.d, &self.weights)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let (d_in, d, weights) = crate::io::load_checkpoint(path)?;
        Self::new(d_in, d, weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encodes_unit_norm() {
        let enc = ToyEncoder::random_init(8, 4, 3);
        let v = SparseVector::new(vec![(1, 1.0), (5, 2.0)]).unwrap();
        let e = enc.encode(&v).unwrap();
        let norm: f64 = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_projection_is_an_error() {
        let enc = ToyEncoder::new(2, 2, vec![0.0; 4]).unwrap();
        let v = SparseVector::new(vec![(0, 1.0)]).unwrap();
        assert!(matches!(enc.encode(&v), Err(Error::DegenerateEncoding(_))));
    }

    #[test]
    fn projection_matches_dense_multiply() {
        let enc = ToyEncoder::new(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let v = SparseVector::new(vec![(0, 2.0), (2, -1.0)]).unwrap();
        // u = 2*[1,2] - 1*[5,6] = [-3, -2]
        assert_eq!(enc.project(&v), vec![-3.0, -2.0]);
    }
}
