//! Hierarchical navigable small-world graph over unit-norm keys, searched by
//! inner product. Keys and queries live on the unit sphere, so maximum inner
//! product coincides with minimum L2 distance and similarities can be used
//! directly.

mod brute;
mod storage;

pub use brute::brute_force_search;

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::scalar::{dot_f64, Scalar};

/// Top-b keys by descending inner product; ids unique, ties broken by
/// ascending key id.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    hits: Vec<(usize, f64)>,
}

impl SearchResult {
    pub(crate) fn new(hits: Vec<(usize, f64)>) -> Self {
        Self { hits }
    }

    pub fn hits(&self) -> &[(usize, f64)] {
        &self.hits
    }

    pub fn ids(&self) -> Vec<usize> {
        self.hits.iter().map(|&(id, _)| id).collect()
    }

    pub fn len(&self) -> usize {
        self.hits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hits.is_empty()
    }
}

/// Layered small-world graph. Holds adjacency only; key vectors are passed
/// alongside at search time, so the same graph serves any lambda.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnIndex {
    m: usize,
    entry_point: usize,
    build_seed: u64,
    /// adjacency[node][level] = neighbor ids; a node exists on levels
    /// `0..=assigned_level`.
    adjacency: Vec<Vec<Vec<usize>>>,
}

impl AnnIndex {
    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Maximum edges per node on levels above zero; level zero allows `2m`.
    pub fn max_degree(&self) -> usize {
        self.m
    }

    pub fn layer0_cap(&self) -> usize {
        2 * self.m
    }

    pub fn entry_point(&self) -> usize {
        self.entry_point
    }

    pub fn build_seed(&self) -> u64 {
        self.build_seed
    }

    pub fn level(&self, node: usize) -> usize {
        self.adjacency[node].len() - 1
    }

    pub fn max_level(&self) -> usize {
        self.level(self.entry_point)
    }

    pub fn neighbors(&self, node: usize, level: usize) -> &[usize] {
        &self.adjacency[node][level]
    }

    /// Checks the structural invariants: degree caps, id ranges, entry point
    /// at the top level, no self-loops.
    pub fn validate(&self) -> Result<()> {
        let n = self.node_count();
        if n == 0 {
            return Err(Error::EmptyKeySet);
        }
        if self.entry_point >= n {
            return Err(Error::Invariant(format!(
                "entry point {} out of range ({n} nodes)",
                self.entry_point
            )));
        }
        let mut top = 0;
        for (id, levels) in self.adjacency.iter().enumerate() {
            if levels.is_empty() {
                return Err(Error::Invariant(format!("node {id} has no level-0 list")));
            }
            top = top.max(levels.len() - 1);
            for (level, list) in levels.iter().enumerate() {
                let cap = if level == 0 { 2 * self.m } else { self.m };
                if list.len() > cap {
                    return Err(Error::Invariant(format!(
                        "node {id} level {level}: degree {} exceeds cap {cap}",
                        list.len()
                    )));
                }
                for &nb in list {
                    if nb >= n {
                        return Err(Error::Invariant(format!(
                            "node {id} level {level}: neighbor {nb} out of range"
                        )));
                    }
                    if nb == id {
                        return Err(Error::Invariant(format!(
                            "node {id} level {level}: self-loop"
                        )));
                    }
                }
            }
        }
        if self.level(self.entry_point) != top {
            return Err(Error::Invariant(format!(
                "entry point {} sits at level {}, but the graph reaches level {top}",
                self.entry_point,
                self.level(self.entry_point)
            )));
        }
        Ok(())
    }
}

/// Heap entry ordered by score with deterministic id tie-breaks: the
/// "greatest" entry has the highest score, and among equal scores the
/// lowest id.
#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    score: f64,
    id: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .partial_cmp(&other.score)
            .expect("scores are finite")
            .then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn sort_hits_desc(hits: &mut [(usize, f64)]) {
    hits.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
}

/// Beam search over one layer. Returns up to `ef` hits sorted by descending
/// score (ties by ascending id). Exploration and eviction orders are fully
/// deterministic, so equal-score frontiers resolve identically across runs.
fn search_layer<T: Scalar>(
    keys: &EmbeddingMatrix<T>,
    adjacency: &[Vec<Vec<usize>>],
    q: &[T],
    entry: (usize, f64),
    ef: usize,
    level: usize,
) -> Vec<(usize, f64)> {
    let mut visited = vec![false; adjacency.len()];
    let mut frontier: BinaryHeap<HeapEntry> = BinaryHeap::new();
    // Reverse-ordered so the top is the worst kept hit: lowest score, and
    // among equals the highest id, which preserves lower ids on eviction.
    let mut kept: BinaryHeap<std::cmp::Reverse<HeapEntry>> = BinaryHeap::new();

    visited[entry.0] = true;
    frontier.push(HeapEntry { score: entry.1, id: entry.0 });
    kept.push(std::cmp::Reverse(HeapEntry { score: entry.1, id: entry.0 }));

    while let Some(cand) = frontier.pop() {
        let worst = kept.peek().expect("kept is non-empty").0;
        if kept.len() == ef && cand.score < worst.score {
            break;
        }
        let neighbors = adjacency[cand.id]
            .get(level)
            .map(|l| l.as_slice())
            .unwrap_or(&[]);
        for &nb in neighbors {
            if visited[nb] {
                continue;
            }
            visited[nb] = true;
            let score = dot_f64(q, keys.row(nb));
            if kept.len() < ef {
                frontier.push(HeapEntry { score, id: nb });
                kept.push(std::cmp::Reverse(HeapEntry { score, id: nb }));
            } else {
                let worst = kept.peek().unwrap().0;
                if score > worst.score || (score == worst.score && nb < worst.id) {
                    kept.pop();
                    frontier.push(HeapEntry { score, id: nb });
                    kept.push(std::cmp::Reverse(HeapEntry { score, id: nb }));
                }
            }
        }
    }

    let mut hits: Vec<(usize, f64)> =
        kept.into_iter().map(|r| (r.0.id, r.0.score)).collect();
    sort_hits_desc(&mut hits);
    hits
}

/// Greedy descent within one layer: hop to the best-scoring neighbor until
/// no neighbor improves on the current node.
fn greedy_closest<T: Scalar>(
    keys: &EmbeddingMatrix<T>,
    adjacency: &[Vec<Vec<usize>>],
    q: &[T],
    start: (usize, f64),
    level: usize,
) -> (usize, f64) {
    let (mut cur, mut cur_score) = start;
    loop {
        let mut best = (cur, cur_score);
        let neighbors = adjacency[cur].get(level).map(|l| l.as_slice()).unwrap_or(&[]);
        for &nb in neighbors {
            let s = dot_f64(q, keys.row(nb));
            if s > best.1 {
                best = (nb, s);
            }
        }
        if best.0 == cur {
            return (cur, cur_score);
        }
        cur = best.0;
        cur_score = best.1;
    }
}

/// Neighbor selection heuristic: walk candidates best-first and keep one only
/// if it is at least as close to the query as to every already-kept neighbor.
/// Remaining slots are filled from the pruned candidates in rank order, which
/// keeps duplicate vectors reachable and the graph well connected.
fn select_neighbors<T: Scalar>(
    keys: &EmbeddingMatrix<T>,
    candidates: &[(usize, f64)],
    m: usize,
) -> Vec<usize> {
    let mut selected: Vec<(usize, f64)> = Vec::with_capacity(m);
    let mut pruned: Vec<usize> = Vec::new();
    for &(cand, score_to_q) in candidates {
        if selected.len() >= m {
            break;
        }
        let dominated = selected
            .iter()
            .any(|&(kept, _)| dot_f64(keys.row(cand), keys.row(kept)) > score_to_q);
        if dominated {
            pruned.push(cand);
        } else {
            selected.push((cand, score_to_q));
        }
    }
    let mut out: Vec<usize> = selected.into_iter().map(|(id, _)| id).collect();
    for id in pruned {
        if out.len() >= m {
            break;
        }
        out.push(id);
    }
    out
}

/// Builds the layered graph by inserting keys in row order with a seeded
/// level sampler (multiplier `1/ln(m)`). Single-threaded, so two builds with
/// identical inputs produce identical adjacency lists.
pub fn build_index<T: Scalar>(
    keys: &EmbeddingMatrix<T>,
    m: usize,
    ef_construction: usize,
    seed: u64,
) -> Result<AnnIndex> {
    let n = keys.rows();
    if n == 0 {
        return Err(Error::EmptyKeySet);
    }
    if m < 2 {
        return Err(Error::InvalidConfig(format!("m must be at least 2, got {m}")));
    }
    if ef_construction < m {
        return Err(Error::InvalidConfig(format!(
            "ef_construction {ef_construction} must be at least m = {m}"
        )));
    }

    let level_mult = 1.0 / (m as f64).ln();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample_level = move || -> usize {
        let u: f64 = 1.0 - rng.random::<f64>(); // (0, 1]
        (-u.ln() * level_mult).floor() as usize
    };

    let mut adjacency: Vec<Vec<Vec<usize>>> = Vec::with_capacity(n);
    adjacency.push(vec![Vec::new(); sample_level() + 1]);
    let mut entry_point = 0usize;
    let mut max_level = adjacency[0].len() - 1;

    for node in 1..n {
        let level = sample_level();
        adjacency.push(vec![Vec::new(); level + 1]);
        let q = keys.row(node);

        let mut cur = (entry_point, dot_f64(q, keys.row(entry_point)));
        let mut layer = max_level;
        while layer > level {
            cur = greedy_closest(keys, &adjacency, q, cur, layer);
            layer -= 1;
        }

        for layer in (0..=level.min(max_level)).rev() {
            let candidates = search_layer(keys, &adjacency, q, cur, ef_construction, layer);
            let cap = if layer == 0 { 2 * m } else { m };
            // New nodes take at most m links even on layer 0; the layer-0
            // cap of 2m applies to reverse links.
            let selected = select_neighbors(keys, &candidates, m);
            adjacency[node][layer] = selected.clone();
            for &nb in &selected {
                adjacency[nb][layer].push(node);
                if adjacency[nb][layer].len() > cap {
                    let nb_vec = keys.row(nb);
                    let mut cands: Vec<(usize, f64)> = adjacency[nb][layer]
                        .iter()
                        .map(|&x| (x, dot_f64(nb_vec, keys.row(x))))
                        .collect();
                    sort_hits_desc(&mut cands);
                    adjacency[nb][layer] = select_neighbors(keys, &cands, cap);
                }
            }
            cur = (candidates[0].0, candidates[0].1);
        }

        if level > max_level {
            max_level = level;
            entry_point = node;
        }
    }

    let index = AnnIndex { m, entry_point, build_seed: seed, adjacency };
    index.validate()?;
    Ok(index)
}

/// Approximate top-`b` inner-product search: greedy descent through the upper
/// layers, then a beam of width `ef_search` on layer 0.
pub fn search<T: Scalar>(
    index: &AnnIndex,
    keys: &EmbeddingMatrix<T>,
    q: &[T],
    b: usize,
    ef_search: usize,
) -> Result<SearchResult> {
    if q.len() != keys.dim() {
        return Err(Error::DimensionMismatch(format!(
            "query dim {} vs key dim {}",
            q.len(),
            keys.dim()
        )));
    }
    if keys.rows() != index.node_count() {
        return Err(Error::DimensionMismatch(format!(
            "index has {} nodes but {} keys were supplied",
            index.node_count(),
            keys.rows()
        )));
    }
    if b == 0 {
        return Err(Error::InvalidConfig("b must be at least 1".into()));
    }
    if b > ef_search {
        return Err(Error::BeyondQueue { b, ef_search });
    }

    let ep = index.entry_point();
    let mut cur = (ep, dot_f64(q, keys.row(ep)));
    for layer in (1..=index.max_level()).rev() {
        cur = greedy_closest(keys, &index.adjacency, q, cur, layer);
    }
    let mut hits = search_layer(keys, &index.adjacency, q, cur, ef_search, 0);
    hits.truncate(b);
    Ok(SearchResult::new(hits))
}
