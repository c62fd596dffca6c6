use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::SearchResult;
use crate::dense::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::scalar::{dot_f64, Scalar};

/// Exact top-`b` maximum-inner-product search over all keys, ties broken by
/// lower key id. Uses a bounded heap rather than a full sort.
pub fn brute_force_search<T: Scalar>(
    keys: &EmbeddingMatrix<T>,
    q: &[T],
    b: usize,
) -> Result<SearchResult> {
    if q.len() != keys.dim() {
        return Err(Error::DimensionMismatch(format!(
            "query dim {} vs key dim {}",
            q.len(),
            keys.dim()
        )));
    }
    if b == 0 {
        return Err(Error::InvalidConfig("b must be at least 1".into()));
    }
    // Worst kept hit on top: lowest score, then highest id, so lower ids win
    // tie eviction.
    let mut kept: BinaryHeap<Reverse<super::HeapEntry>> = BinaryHeap::new();
    for (id, row) in keys.iter_rows().enumerate() {
        let score = dot_f64(q, row);
        if kept.len() < b {
            kept.push(Reverse(super::HeapEntry { score, id }));
        } else {
            let worst = kept.peek().unwrap().0;
            if score > worst.score || (score == worst.score && id < worst.id) {
                kept.pop();
                kept.push(Reverse(super::HeapEntry { score, id }));
            }
        }
    }
    let mut hits: Vec<(usize, f64)> = kept.into_iter().map(|r| (r.0.id, r.0.score)).collect();
    super::sort_hits_desc(&mut hits);
    Ok(SearchResult::new(hits))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keys_from(rows: &[Vec<f64>]) -> EmbeddingMatrix<f64> {
        EmbeddingMatrix::from_rows(rows[0].len(), rows).unwrap()
    }

    #[test]
    fn selects_top_by_score() {
        // Scores against q = e0: [0.9, 0.1, 0.5] after normalization is
        // avoided by using unit rows directly.
        let s = |c: f64| -> Vec<f64> { vec![c, (1.0 - c * c).sqrt()] };
        let keys = keys_from(&[s(0.9), s(0.1), s(0.5)]);
        let res = brute_force_search(&keys, &[1.0, 0.0], 2).unwrap();
        assert_eq!(res.ids(), vec![0, 2]);
        assert!((res.hits()[0].1 - 0.9).abs() < 1e-12);
        assert!((res.hits()[1].1 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tie_breaks_to_lower_id() {
        let s = |c: f64| -> Vec<f64> { vec![c, (1.0 - c * c).sqrt()] };
        let keys = keys_from(&[s(0.5), s(0.5)]);
        let res = brute_force_search(&keys, &[1.0, 0.0], 1).unwrap();
        assert_eq!(res.ids(), vec![0]);
    }

    #[test]
    fn matches_full_sort_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let data: Vec<f64> = (0..200 * 16).map(|_| rng.random::<f64>() - 0.5).collect();
        let keys = EmbeddingMatrix::normalize_rows(200, 16, data).unwrap();
        let qdata: Vec<f64> = (0..16).map(|_| rng.random::<f64>() - 0.5).collect();
        let q = EmbeddingMatrix::normalize_rows(1, 16, qdata).unwrap();

        // Independent oracle: full sort of all inner products.
        let mut all: Vec<(usize, f64)> = keys
            .iter_rows()
            .enumerate()
            .map(|(id, row)| (id, crate::scalar::dot_f64(q.row(0), row)))
            .collect();
        all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        all.truncate(10);

        let res = brute_force_search(&keys, q.row(0), 10).unwrap();
        assert_eq!(res.hits(), all.as_slice());
    }
}
