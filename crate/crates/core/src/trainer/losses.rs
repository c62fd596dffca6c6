use std::collections::HashMap;

use super::encoder::ToyEncoder;
use super::features::ToyDataset;
use crate::error::{Error, Result};

fn validate_positives(n: usize, positives: &[usize]) -> Result<()> {
    if positives.is_empty() {
        return Err(Error::EmptyInput);
    }
    for &p in positives {
        if p >= n {
            return Err(Error::InvalidConfig(format!(
                "positive index {p} out of range ({n} scores)"
            )));
        }
    }
    Ok(())
}

/// Multi-label softmax cross-entropy over a full score vector:
/// `J = -sum_{l in P} log softmax(s/tau)_l`, with its gradient.
pub fn softmax_ce_loss(
    scores: &[f64],
    positives: &[usize],
    tau: f64,
) -> Result<(f64, Vec<f64>)> {
    validate_positives(scores.len(), positives)?;
    if !(tau > 0.0) {
        return Err(Error::InvalidTau(tau));
    }
    let is_pos = positive_mask(scores.len(), positives);
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|&s| ((s - max) / tau).exp()).collect();
    let z: f64 = exps.iter().sum();
    let lse = z.ln() + max / tau;
    let n_pos = positives.len() as f64;

    let mut loss = n_pos * lse;
    for &p in positives {
        loss -= scores[p] / tau;
    }
    let grad: Vec<f64> = exps
        .iter()
        .zip(is_pos.iter())
        .map(|(&e, &pos)| (n_pos * e / z - if pos { 1.0 } else { 0.0 }) / tau)
        .collect();
    Ok((loss, grad))
}

/// Decoupled softmax loss: each positive's denominator keeps its own term and
/// the non-positive terms only, so other positives are not penalized.
pub fn decoupled_softmax_loss(
    scores: &[f64],
    positives: &[usize],
    tau: f64,
) -> Result<(f64, Vec<f64>)> {
    validate_positives(scores.len(), positives)?;
    if !(tau > 0.0) {
        return Err(Error::InvalidTau(tau));
    }
    let is_pos = positive_mask(scores.len(), positives);
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|&s| ((s - max) / tau).exp()).collect();
    let neg_sum: f64 = exps
        .iter()
        .zip(is_pos.iter())
        .filter(|&(_, &pos)| !pos)
        .map(|(&e, _)| e)
        .sum();

    let mut loss = 0.0;
    let mut grad = vec![0.0; scores.len()];
    for &p in positives {
        let denom = exps[p] + neg_sum;
        loss -= (exps[p] / denom).ln();
        grad[p] += -neg_sum / denom / tau;
        for (j, (&e, &pos)) in exps.iter().zip(is_pos.iter()).enumerate() {
            if !pos {
                grad[j] += e / denom / tau;
            }
        }
    }
    Ok((loss, grad))
}

fn positive_mask(n: usize, positives: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &p in positives {
        mask[p] = true;
    }
    mask
}

/// One anchor of a training batch: a sampled positive, mined negative labels,
/// and the in-batch instances sharing no positive label with the anchor.
#[derive(Debug, Clone)]
pub struct TrainBatchItem {
    pub instance: usize,
    pub positive: usize,
    pub negative_labels: Vec<usize>,
    pub negative_instances: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct TrainBatch {
    pub items: Vec<TrainBatchItem>,
}

impl TrainBatch {
    /// Assembles a batch: samples one positive per anchor, attaches that
    /// anchor's mined negatives, and derives the in-batch negative-instance
    /// sets (members sharing no positive label with the anchor).
    pub fn build<R: rand::Rng>(
        dataset: &ToyDataset,
        anchors: &[usize],
        mined_negatives: &[Vec<usize>],
        rng: &mut R,
    ) -> Result<Self> {
        if anchors.is_empty() {
            return Err(Error::EmptyBatch);
        }
        let y = &dataset.labels;
        let mut items = Vec::with_capacity(anchors.len());
        for &a in anchors {
            let pos_set = y.row(a);
            if pos_set.is_empty() {
                return Err(Error::InvalidConfig(format!(
                    "anchor instance {a} has no positive labels"
                )));
            }
            let positive = pos_set[rng.random_range(0..pos_set.len())];
            let negative_instances = anchors
                .iter()
                .copied()
                .filter(|&b| b != a && !share_any_label(y.row(a), y.row(b)))
                .collect();
            items.push(TrainBatchItem {
                instance: a,
                positive,
                negative_labels: mined_negatives[a].clone(),
                negative_instances,
            });
        }
        Ok(Self { items })
    }
}

fn share_any_label(a: &[usize], b: &[usize]) -> bool {
    // Both slices are ascending.
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Equal => return true,
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
        }
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Entity {
    Instance(usize),
    Label(usize),
}

/// Batch loss with in-batch instance negatives: each anchor's denominator
/// holds its positive, its mined negative labels, and its negative-instance
/// scores. Returns the mean item loss and the gradient with respect to the
/// encoder weights, propagated through the L2 normalization.
pub fn rae_training_loss(
    batch: &TrainBatch,
    dataset: &ToyDataset,
    encoder: &ToyEncoder,
    tau: f64,
) -> Result<(f64, Vec<f64>)> {
    if batch.items.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidTau(tau));
    }

    // Encode every distinct entity once.
    let mut slots: HashMap<Entity, usize> = HashMap::new();
    let mut entities: Vec<Entity> = Vec::new();
    let mut embeds: Vec<Vec<f64>> = Vec::new();
    let mut norms: Vec<f64> = Vec::new();
    let mut grads: Vec<Vec<f64>> = Vec::new();
    let d = encoder.d();

    let mut slot_of = |e: Entity,
                       encoder: &ToyEncoder,
                       dataset: &ToyDataset,
                       entities: &mut Vec<Entity>,
                       embeds: &mut Vec<Vec<f64>>,
                       norms: &mut Vec<f64>,
                       grads: &mut Vec<Vec<f64>>|
     -> Result<usize> {
        if let Some(&s) = slots.get(&e) {
            return Ok(s);
        }
        let features = match e {
            Entity::Instance(i) => &dataset.instance_features[i],
            Entity::Label(l) => &dataset.label_features[l],
        };
        let (emb, norm) = encoder.encode_with_norm(features)?;
        let s = entities.len();
        slots.insert(e, s);
        entities.push(e);
        embeds.push(emb);
        norms.push(norm);
        grads.push(vec![0.0; d]);
        Ok(s)
    };

    let inv_b = 1.0 / batch.items.len() as f64;
    let mut total_loss = 0.0;

    for item in &batch.items {
        let anchor = slot_of(
            Entity::Instance(item.instance),
            encoder,
            dataset,
            &mut entities,
            &mut embeds,
            &mut norms,
            &mut grads,
        )?;
        let mut others: Vec<usize> = Vec::with_capacity(
            1 + item.negative_labels.len() + item.negative_instances.len(),
        );
        others.push(slot_of(
            Entity::Label(item.positive),
            encoder,
            dataset,
            &mut entities,
            &mut embeds,
            &mut norms,
            &mut grads,
        )?);
        for &l in &item.negative_labels {
            others.push(slot_of(
                Entity::Label(l),
                encoder,
                dataset,
                &mut entities,
                &mut embeds,
                &mut norms,
                &mut grads,
            )?);
        }
        for &i in &item.negative_instances {
            others.push(slot_of(
                Entity::Instance(i),
                encoder,
                dataset,
                &mut entities,
                &mut embeds,
                &mut norms,
                &mut grads,
            )?);
        }

        let scores: Vec<f64> = others
            .iter()
            .map(|&s| dot(&embeds[anchor], &embeds[s]))
            .collect();
        let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = scores.iter().map(|&s| ((s - max) / tau).exp()).collect();
        let z: f64 = exps.iter().sum();
        total_loss += inv_b * -(exps[0] / z).ln();

        // d(item loss)/d(score_k) = (sigma_k - [k == positive]) / tau.
        for (k, &slot) in others.iter().enumerate() {
            let sigma = exps[k] / z;
            let g = inv_b * (sigma - if k == 0 { 1.0 } else { 0.0 }) / tau;
            if g == 0.0 {
                continue;
            }
            for j in 0..d {
                grads[anchor][j] += g * embeds[slot][j];
                grads[slot][j] += g * embeds[anchor][j];
            }
        }
    }

    // Through the normalization Jacobian (I - e e^T)/||u||, then into W via
    // the sparse input features.
    let mut dw = vec![0.0; encoder.d_in() * d];
    for (slot, entity) in entities.iter().enumerate() {
        let e = &embeds[slot];
        let g = &grads[slot];
        let e_dot_g: f64 = dot(e, g);
        let gu: Vec<f64> = e
            .iter()
            .zip(g.iter())
            .map(|(&ej, &gj)| (gj - ej * e_dot_g) / norms[slot])
            .collect();
        let features = match *entity {
            Entity::Instance(i) => &dataset.instance_features[i],
            Entity::Label(l) => &dataset.label_features[l],
        };
        for &(idx, val) in features.entries() {
            for j in 0..d {
                dw[idx * d + j] += val * gu[j];
            }
        }
    }

    Ok((total_loss, dw))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
