use crate::error::{Error, Result};
use crate::scalar::{dot_f64, norm_f64, Scalar};

/// Tolerance under which a row norm counts as zero.
pub const ZERO_NORM_EPS: f64 = 1e-12;

/// Ingest tolerance: rows within this of unit norm are considered already
/// normalized (external embedding files carry 32-bit rounding).
pub const UNIT_NORM_TOL: f64 = 1e-4;

/// Dense row-major matrix of unit-norm vectors.
///
/// Rows are projected onto the unit sphere on construction; all matrices
/// combined into one knowledge memory must share `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix<T: Scalar = f32> {
    rows: usize,
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> EmbeddingMatrix<T> {
    /// L2-normalizes each row of a raw row-major buffer.
    ///
    /// Rows already within [`UNIT_NORM_TOL`] of unit norm pass through
    /// bit-unchanged, which keeps file round-trips byte-exact. Errors with
    /// [`Error::ZeroRow`] if any row norm falls below [`ZERO_NORM_EPS`].
    pub fn normalize_rows(rows: usize, dim: usize, mut data: Vec<T>) -> Result<Self> {
        if rows.checked_mul(dim) != Some(data.len()) {
            return Err(Error::DimensionMismatch(format!(
                "expected {rows}x{dim} = {} values, got {}",
                rows * dim,
                data.len()
            )));
        }
        for r in 0..rows {
            let row = &mut data[r * dim..(r + 1) * dim];
            let norm = norm_f64(row);
            if norm < ZERO_NORM_EPS {
                return Err(Error::ZeroRow(r));
            }
            if (norm - 1.0).abs() <= UNIT_NORM_TOL {
                continue;
            }
            for x in row.iter_mut() {
                *x = T::from_f64_lossy(x.as_f64() / norm);
            }
        }
        Ok(Self { rows, dim, data })
    }

    /// Builds from per-row vectors, normalizing each.
    pub fn from_rows(dim: usize, rows: &[Vec<T>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            data.extend_from_slice(row);
        }
        Self::normalize_rows(rows.len(), dim, data)
    }

    /// Vertical stack; both operands are already unit-norm so no
    /// renormalization happens.
    pub fn vstack(top: &Self, bottom: &Self) -> Result<Self> {
        if top.dim != bottom.dim {
            return Err(Error::DimensionMismatch(format!(
                "cannot stack dim {} over dim {}",
                top.dim, bottom.dim
            )));
        }
        let mut data = Vec::with_capacity(top.data.len() + bottom.data.len());
        data.extend_from_slice(&top.data);
        data.extend_from_slice(&bottom.data);
        Ok(Self { rows: top.rows + bottom.rows, dim: top.dim, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.dim)
    }

    /// Inner product between row `i` and an external vector, in f64.
    pub fn dot_row(&self, i: usize, v: &[T]) -> f64 {
        dot_f64(self.row(i), v)
    }

    /// Copies a contiguous row range into a new matrix.
    pub fn slice_rows(&self, start: usize, end: usize) -> Self {
        debug_assert!(start <= end && end <= self.rows);
        Self {
            rows: end - start,
            dim: self.dim,
            data: self.data[start * self.dim..end * self.dim].to_vec(),
        }
    }

    /// True when every row norm is within `tol` of one.
    pub fn rows_unit_norm(&self, tol: f64) -> bool {
        self.iter_rows().all(|r| (norm_f64(r) - 1.0).abs() <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::norm_f64;

    #[test]
    fn normalizes_3_4_triangle() {
        let m = EmbeddingMatrix::<f64>::normalize_rows(1, 2, vec![3.0, 4.0]).unwrap();
        assert_eq!(m.row(0), &[0.6, 0.8]);
    }

    #[test]
    fn normalizes_axis_vectors() {
        let m = EmbeddingMatrix::<f64>::normalize_rows(2, 2, vec![1.0, 0.0, 0.0, 2.0]).unwrap();
        assert_eq!(m.row(0), &[1.0, 0.0]);
        assert_eq!(m.row(1), &[0.0, 1.0]);
    }

    #[test]
    fn random_rows_come_out_unit_norm() {
        // Oracle: recompute each norm independently of the constructor.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let data: Vec<f32> = (0..5 * 8).map(|_| rng.random::<f32>() * 2.0 - 1.0).collect();
        let m = EmbeddingMatrix::normalize_rows(5, 8, data).unwrap();
        for r in 0..5 {
            let norm = norm_f64(m.row(r));
            assert!((norm - 1.0).abs() < 1e-6, "row {r} norm {norm}");
        }
    }

    #[test]
    fn zero_row_rejected() {
        let err = EmbeddingMatrix::<f32>::normalize_rows(2, 2, vec![1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(err, Err(Error::ZeroRow(1))));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let err = EmbeddingMatrix::<f32>::normalize_rows(2, 3, vec![1.0; 5]);
        assert!(matches!(err, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn vstack_requires_matching_dim() {
        let a = EmbeddingMatrix::<f64>::normalize_rows(1, 2, vec![1.0, 0.0]).unwrap();
        let b = EmbeddingMatrix::<f64>::normalize_rows(1, 3, vec![1.0, 0.0, 0.0]).unwrap();
        assert!(EmbeddingMatrix::vstack(&a, &b).is_err());
    }
}
