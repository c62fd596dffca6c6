use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::sparse::LabelMatrix;

/// Hard-negative mining over current encoder embeddings: for each instance,
/// rank all labels by inner product, keep the top `hnm_topk`, drop positives,
/// and sample `m` uniformly from the remainder. When fewer than `m` survive,
/// the shortfall is padded with uniform random non-positive labels.
pub fn hard_negative_mine(
    x_emb: &EmbeddingMatrix<f64>,
    z_emb: &EmbeddingMatrix<f64>,
    y: &LabelMatrix,
    hnm_topk: usize,
    m: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>> {
    if x_emb.dim() != z_emb.dim() {
        return Err(Error::DimensionMismatch(format!(
            "instance dim {} vs label dim {}",
            x_emb.dim(),
            z_emb.dim()
        )));
    }
    if x_emb.rows() != y.n_rows() || z_emb.rows() != y.n_labels() {
        return Err(Error::DimensionMismatch(
            "embeddings and label matrix disagree on N or L".into(),
        ));
    }
    if hnm_topk < m {
        return Err(Error::InvalidConfig(format!(
            "hnm_topk {hnm_topk} must be at least m = {m}"
        )));
    }
    let n_labels = y.n_labels();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mined = Vec::with_capacity(x_emb.rows());

    for i in 0..x_emb.rows() {
        let xi = x_emb.row(i);
        let mut scored: Vec<(usize, f64)> = (0..n_labels)
            .map(|l| (l, z_emb.dot_row(l, xi)))
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        scored.truncate(hnm_topk);

        let mut shortlist: Vec<usize> = scored
            .iter()
            .map(|&(l, _)| l)
            .filter(|&l| !y.contains(i, l))
            .collect();

        let mut chosen: Vec<usize> = if shortlist.len() <= m {
            std::mem::take(&mut shortlist)
        } else {
            // Uniform sample of m without replacement: partial Fisher-Yates.
            for k in 0..m {
                let j = rng.random_range(k..shortlist.len());
                shortlist.swap(k, j);
            }
            shortlist.truncate(m);
            shortlist
        };

        // Fallback padding with uniform random non-positive labels.
        let available = n_labels - y.row(i).len();
        while chosen.len() < m.min(available) {
            let l = rng.random_range(0..n_labels);
            if !y.contains(i, l) && !chosen.contains(&l) {
                chosen.push(l);
            }
        }
        mined.push(chosen);
    }
    Ok(mined)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_rows(rows: &[Vec<f64>]) -> EmbeddingMatrix<f64> {
        EmbeddingMatrix::from_rows(rows[0].len(), rows).unwrap()
    }

    #[test]
    fn all_top_positives_falls_back_to_random_negatives() {
        // One instance aligned with labels 0 and 1 (its positives); with
        // hnm_topk = 2 every shortlisted label is positive, so the fallback
        // must supply non-positive labels.
        let x = unit_rows(&[vec![1.0, 0.0]]);
        let z = unit_rows(&[
            vec![1.0, 0.0],
            vec![0.9, (1.0f64 - 0.81).sqrt()],
            vec![0.0, 1.0],
            vec![-1.0, 0.0],
        ]);
        let y = LabelMatrix::from_rows(4, &[vec![0, 1]]).unwrap();
        let mined = hard_negative_mine(&x, &z, &y, 2, 2, 5).unwrap();
        assert_eq!(mined[0].len(), 2);
        for &l in &mined[0] {
            assert!(!y.contains(0, l));
        }
    }

    #[test]
    fn m_equals_topk_with_no_positives_takes_hardest() {
        let x = unit_rows(&[vec![1.0, 0.0]]);
        let z = unit_rows(&[
            vec![0.95, (1.0f64 - 0.9025).sqrt()],
            vec![0.5, (1.0f64 - 0.25).sqrt()],
            vec![0.0, 1.0],
            vec![0.8, 0.6],
        ]);
        // The single positive, label 2, is the furthest label.
        let y = LabelMatrix::from_rows(4, &[vec![2]]).unwrap();
        let mut mined = hard_negative_mine(&x, &z, &y, 2, 2, 0).unwrap();
        mined[0].sort_unstable();
        assert_eq!(mined[0], vec![0, 3]);
    }

    #[test]
    fn mined_negatives_come_from_shortlist_or_fallback() {
        // Oracle: recompute the full ranking; every mined id must either
        // score at least the hnm_topk-th ranked label or be a fallback pick.
        use rand::{Rng, SeedableRng};
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let n = 12;
        let l = 30;
        let d = 8;
        let xd: Vec<f64> = (0..n * d).map(|_| rng.random::<f64>() - 0.5).collect();
        let zd: Vec<f64> = (0..l * d).map(|_| rng.random::<f64>() - 0.5).collect();
        let x = EmbeddingMatrix::normalize_rows(n, d, xd).unwrap();
        let z = EmbeddingMatrix::normalize_rows(l, d, zd).unwrap();
        let rows: Vec<Vec<usize>> = (0..n)
            .map(|_| (0..l).filter(|_| rng.random::<f64>() < 0.2).collect())
            .collect();
        let rows: Vec<Vec<usize>> = rows
            .into_iter()
            .map(|mut r| {
                if r.is_empty() {
                    r.push(0);
                }
                r
            })
            .collect();
        let y = LabelMatrix::from_rows(l, &rows).unwrap();
        let (topk, m) = (6, 3);
        let mined = hard_negative_mine(&x, &z, &y, topk, m, 77).unwrap();
        for i in 0..n {
            let mut full: Vec<(usize, f64)> =
                (0..l).map(|lab| (lab, z.dot_row(lab, x.row(i)))).collect();
            full.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
            let shortlist: std::collections::HashSet<usize> =
                full.iter().take(topk).map(|&(lab, _)| lab).collect();
            let shortlist_negs =
                shortlist.iter().filter(|&&lab| !y.contains(i, lab)).count();
            for &lab in &mined[i] {
                assert!(!y.contains(i, lab), "mined a positive");
                if shortlist_negs >= m {
                    assert!(shortlist.contains(&lab), "non-shortlist pick without fallback");
                }
            }
            assert_eq!(mined[i].len(), m.min(l - y.row(i).len()));
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let x = unit_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let z = unit_rows(&[vec![1.0, 0.0], vec![0.6, 0.8], vec![0.0, 1.0], vec![0.8, 0.6]]);
        let y = LabelMatrix::from_rows(4, &[vec![0], vec![2]]).unwrap();
        let a = hard_negative_mine(&x, &z, &y, 3, 2, 9).unwrap();
        let b = hard_negative_mine(&x, &z, &y, 3, 2, 9).unwrap();
        assert_eq!(a, b);
    }
}
