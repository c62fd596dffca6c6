//! The retrieval-augmented predictor: top-b key retrieval, temperature
//! softmax over the retrieved scores, lambda-weighted value aggregation.
//! Also the exact full-memory oracle, the split-index convex-combination
//! variant, retrieval-source diagnostics, and a latency probe.

use std::collections::HashMap;
use std::time::Instant;

use crate::ann::{search, AnnIndex, SearchResult};
use crate::dense::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::memory::{KeySource, KnowledgeMemory};
use crate::prediction::{rank_accumulator, PredictionSet};
use crate::scalar::{dot_f64, Scalar};
use crate::softmax::softmax_over_scores;

/// Inference knobs. Defaults: b=200, tau=0.04, lambda=0.5, efS=300,
/// topk=100.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferenceConfig {
    pub b: usize,
    pub tau: f64,
    pub lambda: f64,
    pub topk: usize,
    pub ef_search: usize,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self { b: 200, tau: 0.04, lambda: 0.5, topk: 100, ef_search: 300 }
    }
}

impl InferenceConfig {
    /// Preset for memories whose instance keys should barely outvote label
    /// keys (lambda = 0.01).
    pub fn low_lambda_preset() -> Self {
        Self { lambda: 0.01, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.b == 0 || self.topk == 0 {
            return Err(Error::InvalidConfig("b and topk must be at least 1".into()));
        }
        if self.ef_search < self.b {
            return Err(Error::BeyondQueue { b: self.b, ef_search: self.ef_search });
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::InvalidTau(self.tau));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidLambda(self.lambda));
        }
        Ok(())
    }
}

/// Restricted softmax over the retrieved keys, then per-label accumulation
/// of `p(key) * value(key, label)` under the given lambda. Zero-weight
/// contributions are skipped so rankings never carry signal-free labels.
fn aggregate<T: Scalar>(
    memory: &KnowledgeMemory<T>,
    hits: &[(usize, f64)],
    tau: f64,
    lambda: f64,
    topk: usize,
) -> Result<Vec<(usize, f64)>> {
    if hits.is_empty() {
        return Ok(Vec::new());
    }
    let scores: Vec<f64> = hits.iter().map(|&(_, s)| s).collect();
    let probs = softmax_over_scores(&scores, tau)?;
    let mut acc: HashMap<usize, f64> = HashMap::new();
    for (&(key, _), &p) in hits.iter().zip(probs.iter()) {
        match memory.key_source(key) {
            KeySource::Instance(i) => {
                if lambda > 0.0 {
                    let w = lambda * p;
                    if w > 0.0 {
                        for &l in memory.train_labels().row(i) {
                            *acc.entry(l).or_default() += w;
                        }
                    }
                }
            }
            KeySource::Label(l) => {
                if lambda < 1.0 {
                    let w = (1.0 - lambda) * p;
                    if w > 0.0 {
                        *acc.entry(l).or_default() += w;
                    }
                }
            }
        }
    }
    Ok(rank_accumulator(acc, topk))
}

/// Top-b retrieval-augmented prediction over an index built on the memory's
/// joint key matrix.
pub fn predict<T: Scalar>(
    memory: &KnowledgeMemory<T>,
    index: &AnnIndex,
    queries: &EmbeddingMatrix<T>,
    cfg: &InferenceConfig,
) -> Result<PredictionSet> {
    cfg.validate()?;
    check_query_dim(memory, queries)?;
    if index.node_count() != memory.n_keys() {
        return Err(Error::DimensionMismatch(format!(
            "index over {} nodes vs {} memory keys",
            index.node_count(),
            memory.n_keys()
        )));
    }
    let mut lists = Vec::with_capacity(queries.rows());
    for q in queries.iter_rows() {
        let hits = search(index, memory.keys(), q, cfg.b, cfg.ef_search)?;
        lists.push(aggregate(memory, hits.hits(), cfg.tau, cfg.lambda, cfg.topk)?);
    }
    PredictionSet::from_lists(lists)
}

/// Exact inference: the softmax runs over every key in the memory, no
/// retrieval truncation. Serves as the convergence oracle for [`predict`].
pub fn predict_exact<T: Scalar>(
    memory: &KnowledgeMemory<T>,
    queries: &EmbeddingMatrix<T>,
    tau: f64,
    lambda: f64,
    topk: usize,
) -> Result<PredictionSet> {
    check_query_dim(memory, queries)?;
    if topk == 0 {
        return Err(Error::InvalidConfig("topk must be at least 1".into()));
    }
    let keys = memory.keys();
    let mut lists = Vec::with_capacity(queries.rows());
    for q in queries.iter_rows() {
        let hits: Vec<(usize, f64)> = (0..keys.rows())
            .map(|k| (k, dot_f64(q, keys.row(k))))
            .collect();
        lists.push(aggregate(memory, &hits, tau, lambda, topk)?);
    }
    PredictionSet::from_lists(lists)
}

/// Convex-combination ablation predictor: two separate retrievals (instance
/// keys and label keys), each with its own restricted softmax, combined as
/// `lambda * knn_vote + (1 - lambda) * label_softmax`.
pub fn predict_ova_knn<T: Scalar>(
    memory: &KnowledgeMemory<T>,
    instance_index: &AnnIndex,
    label_index: &AnnIndex,
    queries: &EmbeddingMatrix<T>,
    cfg: &InferenceConfig,
) -> Result<PredictionSet> {
    cfg.validate()?;
    check_query_dim(memory, queries)?;
    if instance_index.node_count() != memory.n_instances() {
        return Err(Error::DimensionMismatch(format!(
            "instance index over {} nodes vs {} instances",
            instance_index.node_count(),
            memory.n_instances()
        )));
    }
    if label_index.node_count() != memory.n_labels() {
        return Err(Error::DimensionMismatch(format!(
            "label index over {} nodes vs {} labels",
            label_index.node_count(),
            memory.n_labels()
        )));
    }
    let x_keys = memory.instance_key_matrix();
    let z_keys = memory.label_key_matrix();
    let y = memory.train_labels();
    let mut lists = Vec::with_capacity(queries.rows());
    for q in queries.iter_rows() {
        let mut acc: HashMap<usize, f64> = HashMap::new();
        if cfg.lambda > 0.0 {
            let hits = search(instance_index, &x_keys, q, cfg.b, cfg.ef_search)?;
            let scores: Vec<f64> = hits.hits().iter().map(|&(_, s)| s).collect();
            let probs = softmax_over_scores(&scores, cfg.tau)?;
            for (&(i, _), &p) in hits.hits().iter().zip(probs.iter()) {
                let w = cfg.lambda * p;
                if w > 0.0 {
                    for &l in y.row(i) {
                        *acc.entry(l).or_default() += w;
                    }
                }
            }
        }
        if cfg.lambda < 1.0 {
            let hits = search(label_index, &z_keys, q, cfg.b, cfg.ef_search)?;
            let scores: Vec<f64> = hits.hits().iter().map(|&(_, s)| s).collect();
            let probs = softmax_over_scores(&scores, cfg.tau)?;
            for (&(l, _), &p) in hits.hits().iter().zip(probs.iter()) {
                let w = (1.0 - cfg.lambda) * p;
                if w > 0.0 {
                    *acc.entry(l).or_default() += w;
                }
            }
        }
        lists.push(rank_accumulator(acc, cfg.topk));
    }
    PredictionSet::from_lists(lists)
}

/// Fractions of retrieved keys that are instances vs labels, averaged over
/// queries. The two fractions sum to one.
pub fn retrieval_source_mix<T: Scalar>(
    memory: &KnowledgeMemory<T>,
    results: &[SearchResult],
) -> Result<(f64, f64)> {
    if results.is_empty() || results.iter().any(|r| r.is_empty()) {
        return Err(Error::EmptyResults);
    }
    let n_keys = memory.n_keys();
    let mut instance_frac = 0.0;
    for r in results {
        let mut inst = 0usize;
        for &(id, _) in r.hits() {
            if id >= n_keys {
                return Err(Error::DimensionMismatch(format!(
                    "retrieved key id {id} out of range ({n_keys} keys)"
                )));
            }
            if matches!(memory.key_source(id), KeySource::Instance(_)) {
                inst += 1;
            }
        }
        instance_frac += inst as f64 / r.len() as f64;
    }
    instance_frac /= results.len() as f64;
    Ok((instance_frac, 1.0 - instance_frac))
}

/// Wall-clock samples for the retrieval and aggregation stages (query
/// embedding excluded; queries arrive pre-embedded).
#[derive(Debug, Clone)]
pub struct LatencyReport {
    pub search_secs: Vec<f64>,
    pub aggregate_secs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencySummary {
    pub mean: f64,
    pub p50: f64,
    pub p99: f64,
}

impl LatencyReport {
    pub fn n_queries(&self) -> usize {
        self.search_secs.len()
    }

    pub fn total_secs(&self) -> Vec<f64> {
        self.search_secs
            .iter()
            .zip(self.aggregate_secs.iter())
            .map(|(a, b)| a + b)
            .collect()
    }

    pub fn summary(samples: &[f64]) -> LatencySummary {
        assert!(!samples.is_empty());
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let nearest = |p: f64| -> f64 {
            let idx = (p * (sorted.len() - 1) as f64).round() as usize;
            sorted[idx]
        };
        LatencySummary {
            mean: samples.iter().sum::<f64>() / samples.len() as f64,
            p50: nearest(0.50),
            p99: nearest(0.99),
        }
    }
}

/// Times search and aggregation separately for each query.
pub fn latency_probe<T: Scalar>(
    memory: &KnowledgeMemory<T>,
    index: &AnnIndex,
    queries: &EmbeddingMatrix<T>,
    cfg: &InferenceConfig,
) -> Result<LatencyReport> {
    cfg.validate()?;
    check_query_dim(memory, queries)?;
    let mut report = LatencyReport {
        search_secs: Vec::with_capacity(queries.rows()),
        aggregate_secs: Vec::with_capacity(queries.rows()),
    };
    for q in queries.iter_rows() {
        let t0 = Instant::now();
        let hits = search(index, memory.keys(), q, cfg.b, cfg.ef_search)?;
        let t1 = Instant::now();
        let ranked = aggregate(memory, hits.hits(), cfg.tau, cfg.lambda, cfg.topk)?;
        let t2 = Instant::now();
        std::hint::black_box(&ranked);
        report.search_secs.push((t1 - t0).as_secs_f64());
        report.aggregate_secs.push((t2 - t1).as_secs_f64());
    }
    Ok(report)
}

fn check_query_dim<T: Scalar>(
    memory: &KnowledgeMemory<T>,
    queries: &EmbeddingMatrix<T>,
) -> Result<()> {
    if queries.dim() != memory.dim() {
        return Err(Error::DimensionMismatch(format!(
            "query dim {} vs memory dim {}",
            queries.dim(),
            memory.dim()
        )));
    }
    Ok(())
}
