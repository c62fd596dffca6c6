use std::collections::HashMap;

use crate::error::{Error, Result};

/// Per-query truncated ranked label lists.
///
/// Scores are non-increasing within each list and label ids are unique;
/// ties are broken by ascending label id.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    lists: Vec<Vec<(usize, f64)>>,
}

impl PredictionSet {
    pub fn from_lists(lists: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        for (q, list) in lists.iter().enumerate() {
            let mut seen = std::collections::HashSet::new();
            for (j, &(label, score)) in list.iter().enumerate() {
                if !seen.insert(label) {
                    return Err(Error::Invariant(format!(
                        "query {q}: duplicate label {label} in ranked list"
                    )));
                }
                if j > 0 && list[j - 1].1 < score {
                    return Err(Error::Invariant(format!(
                        "query {q}: scores increase at rank {j}"
                    )));
                }
            }
        }
        Ok(Self { lists })
    }

    pub fn n_queries(&self) -> usize {
        self.lists.len()
    }

    /// Ranked `(label, score)` pairs for query `q`.
    pub fn list(&self, q: usize) -> &[(usize, f64)] {
        &self.lists[q]
    }

    /// Label ids (rank order) for query `q`.
    pub fn labels(&self, q: usize) -> Vec<usize> {
        self.lists[q].iter().map(|&(l, _)| l).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec<(usize, f64)>> {
        self.lists.iter()
    }

    /// Score for `(query, label)`, zero when the label is not in the list.
    pub fn score(&self, q: usize, label: usize) -> f64 {
        self.lists[q]
            .iter()
            .find(|&&(l, _)| l == label)
            .map(|&(_, s)| s)
            .unwrap_or(0.0)
    }
}

/// Sorts a sparse label->score accumulator into a ranked list, descending by
/// score with ties broken by ascending label id, truncated to `topk`.
pub fn rank_accumulator(acc: HashMap<usize, f64>, topk: usize) -> Vec<(usize, f64)> {
    let mut ranked: Vec<(usize, f64)> = acc.into_iter().collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    ranked.truncate(topk);
    ranked
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranking_breaks_ties_by_label_id() {
        let mut acc = HashMap::new();
        acc.insert(7, 0.5);
        acc.insert(2, 0.5);
        acc.insert(4, 0.9);
        assert_eq!(rank_accumulator(acc, 10), vec![(4, 0.9), (2, 0.5), (7, 0.5)]);
    }

    #[test]
    fn truncates_to_topk() {
        let mut acc = HashMap::new();
        for i in 0..10 {
            acc.insert(i, i as f64);
        }
        let ranked = rank_accumulator(acc, 3);
        assert_eq!(ranked, vec![(9, 9.0), (8, 8.0), (7, 7.0)]);
    }

    #[test]
    fn rejects_violating_lists() {
        assert!(PredictionSet::from_lists(vec![vec![(0, 1.0), (0, 0.5)]]).is_err());
        assert!(PredictionSet::from_lists(vec![vec![(0, 0.5), (1, 1.0)]]).is_err());
        assert!(PredictionSet::from_lists(vec![vec![(0, 1.0), (1, 0.5)]]).is_ok());
    }
}
