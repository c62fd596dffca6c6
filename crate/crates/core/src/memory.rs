use crate::dense::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sparse::LabelMatrix;

/// Where a retrieved key comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KeySource {
    /// Training instance row `i`; its values are `lambda * Y[i, .]`.
    Instance(usize),
    /// Label row `l`; its value is `(1 - lambda)` on label `l` alone.
    Label(usize),
}

/// Joint instance+label memory: key matrix `[X; Z]` plus the training label
/// matrix that defines key values.
///
/// The value matrix `[lambda*Y; (1-lambda)*I]` is never materialized; lambda
/// is applied lazily at aggregation time so lambda sweeps reuse the same keys
/// and any index built over them.
#[derive(Debug, Clone)]
pub struct KnowledgeMemory<T: Scalar = f32> {
    keys: EmbeddingMatrix<T>,
    train_labels: LabelMatrix,
    lambda: f64,
    tau: f64,
}

impl<T: Scalar> KnowledgeMemory<T> {
    pub fn build(
        x_emb: EmbeddingMatrix<T>,
        z_emb: EmbeddingMatrix<T>,
        train_labels: LabelMatrix,
        lambda: f64,
        tau: f64,
    ) -> Result<Self> {
        if x_emb.rows() != train_labels.n_rows() {
            return Err(Error::DimensionMismatch(format!(
                "{} instance embeddings vs {} label-matrix rows",
                x_emb.rows(),
                train_labels.n_rows()
            )));
        }
        if z_emb.rows() != train_labels.n_labels() {
            return Err(Error::DimensionMismatch(format!(
                "{} label embeddings vs {} labels",
                z_emb.rows(),
                train_labels.n_labels()
            )));
        }
        if x_emb.dim() != z_emb.dim() {
            return Err(Error::DimensionMismatch(format!(
                "instance dim {} vs label dim {}",
                x_emb.dim(),
                z_emb.dim()
            )));
        }
        validate_lambda(lambda)?;
        validate_tau(tau)?;
        let keys = EmbeddingMatrix::vstack(&x_emb, &z_emb)?;
        Ok(Self { keys, train_labels, lambda, tau })
    }

    pub fn keys(&self) -> &EmbeddingMatrix<T> {
        &self.keys
    }

    pub fn train_labels(&self) -> &LabelMatrix {
        &self.train_labels
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Replaces the stored lambda without touching keys or labels.
    pub fn set_lambda(&mut self, lambda: f64) -> Result<()> {
        validate_lambda(lambda)?;
        self.lambda = lambda;
        Ok(())
    }

    pub fn n_instances(&self) -> usize {
        self.train_labels.n_rows()
    }

    pub fn n_labels(&self) -> usize {
        self.train_labels.n_labels()
    }

    pub fn n_keys(&self) -> usize {
        self.keys.rows()
    }

    pub fn dim(&self) -> usize {
        self.keys.dim()
    }

    pub fn key_source(&self, key_id: usize) -> KeySource {
        let n = self.n_instances();
        if key_id < n {
            KeySource::Instance(key_id)
        } else {
            KeySource::Label(key_id - n)
        }
    }

    /// Value-matrix entry for `(key_id, label)` at a given lambda.
    pub fn value_at(&self, key_id: usize, label: usize, lambda: f64) -> f64 {
        match self.key_source(key_id) {
            KeySource::Instance(i) => {
                if self.train_labels.contains(i, label) {
                    lambda
                } else {
                    0.0
                }
            }
            KeySource::Label(l) => {
                if l == label {
                    1.0 - lambda
                } else {
                    0.0
                }
            }
        }
    }

    /// Value-matrix entry under the stored lambda.
    pub fn value(&self, key_id: usize, label: usize) -> f64 {
        self.value_at(key_id, label, self.lambda)
    }

    /// Copy of the instance-key rows (the `X` block).
    pub fn instance_key_matrix(&self) -> EmbeddingMatrix<T> {
        self.keys.slice_rows(0, self.n_instances())
    }

    /// Copy of the label-key rows (the `Z` block).
    pub fn label_key_matrix(&self) -> EmbeddingMatrix<T> {
        self.keys.slice_rows(self.n_instances(), self.n_keys())
    }
}

fn validate_lambda(lambda: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&lambda) || !lambda.is_finite() {
        return Err(Error::InvalidLambda(lambda));
    }
    Ok(())
}

fn validate_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidTau(tau));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_memory(lambda: f64) -> KnowledgeMemory<f64> {
        // N=2, L=3, d=4.
        let x = EmbeddingMatrix::from_rows(
            4,
            &[vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0]],
        )
        .unwrap();
        let z = EmbeddingMatrix::from_rows(
            4,
            &[
                vec![0.0, 0.0, 1.0, 0.0],
                vec![0.0, 0.0, 0.0, 1.0],
                vec![1.0, 1.0, 0.0, 0.0],
            ],
        )
        .unwrap();
        let y = LabelMatrix::from_rows(3, &[vec![0, 2], vec![1]]).unwrap();
        KnowledgeMemory::build(x, z, y, lambda, 0.04).unwrap()
    }

    #[test]
    fn stacks_keys_and_exposes_values() {
        let mem = toy_memory(0.5);
        assert_eq!(mem.n_keys(), 5);
        for l in 0..3 {
            let y0 = if l == 0 || l == 2 { 1.0 } else { 0.0 };
            assert_eq!(mem.value(0, l), 0.5 * y0);
            for j in 0..3 {
                let expect = if j == l { 0.5 } else { 0.0 };
                assert_eq!(mem.value(2 + j, l), expect);
            }
        }
    }

    #[test]
    fn lambda_zero_kills_instance_values() {
        let mem = toy_memory(0.0);
        for l in 0..3 {
            assert_eq!(mem.value(0, l), 0.0);
            assert_eq!(mem.value(1, l), 0.0);
            assert_eq!(mem.value(2 + l, l), 1.0);
        }
    }

    #[test]
    fn lambda_one_kills_label_values() {
        let mem = toy_memory(1.0);
        for l in 0..3 {
            assert_eq!(mem.value(2 + l, l), 0.0);
        }
        assert_eq!(mem.value(0, 0), 1.0);
        assert_eq!(mem.value(0, 1), 0.0);
        assert_eq!(mem.value(1, 1), 1.0);
    }

    #[test]
    fn exhaustive_value_semantics_small() {
        // Every (key, label) pair reproduces lambda*Y / (1-lambda)*I on a
        // randomized instance with N, L <= 20.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let (n, l, d) = (17, 13, 6);
        let x_rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.random::<f64>() - 0.5).collect())
            .collect();
        let z_rows: Vec<Vec<f64>> = (0..l)
            .map(|_| (0..d).map(|_| rng.random::<f64>() - 0.5).collect())
            .collect();
        let y_rows: Vec<Vec<usize>> = (0..n)
            .map(|_| (0..l).filter(|_| rng.random::<f64>() < 0.3).collect())
            .collect();
        let y = LabelMatrix::from_rows(l, &y_rows).unwrap();
        let lambda = 0.37;
        let mem = KnowledgeMemory::build(
            EmbeddingMatrix::from_rows(d, &x_rows).unwrap(),
            EmbeddingMatrix::from_rows(d, &z_rows).unwrap(),
            y.clone(),
            lambda,
            0.04,
        )
        .unwrap();
        for key in 0..n + l {
            for label in 0..l {
                let expect = if key < n {
                    lambda * if y.contains(key, label) { 1.0 } else { 0.0 }
                } else {
                    (1.0 - lambda) * if key - n == label { 1.0 } else { 0.0 }
                };
                assert_eq!(mem.value(key, label), expect, "key {key} label {label}");
            }
        }
    }

    #[test]
    fn lambda_change_leaves_keys_alone() {
        let mut mem = toy_memory(0.5);
        let before = mem.keys().clone();
        mem.set_lambda(0.9).unwrap();
        assert_eq!(mem.keys(), &before);
        assert_eq!(mem.value(0, 0), 0.9);
    }

    #[test]
    fn rejects_bad_parameters() {
        let x = EmbeddingMatrix::from_rows(2, &[vec![1.0f64, 0.0]]).unwrap();
        let z = EmbeddingMatrix::from_rows(2, &[vec![0.0f64, 1.0]]).unwrap();
        let y = LabelMatrix::from_rows(1, &[vec![0]]).unwrap();
        assert!(matches!(
            KnowledgeMemory::build(x.clone(), z.clone(), y.clone(), -0.1, 0.04),
            Err(Error::InvalidLambda(_))
        ));
        assert!(matches!(
            KnowledgeMemory::build(x.clone(), z.clone(), y.clone(), 0.5, 0.0),
            Err(Error::InvalidTau(_))
        ));
        let z3 = EmbeddingMatrix::from_rows(3, &[vec![0.0f64, 1.0, 0.0]]).unwrap();
        assert!(matches!(
            KnowledgeMemory::build(x, z3, y, 0.5, 0.04),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
