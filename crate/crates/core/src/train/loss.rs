//! Cross-entropy rectification loss over hard-labelled and soft-labelled
//! triples, with its analytic gradient.

use std::collections::BTreeMap;

use crate::model::{sigmoid, EmbeddingSet};
use crate::store::{EntityId, RelationId, Triple};

use super::config::Regularization;
use super::sampling::LabeledExample;

/// `log(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Cross entropy `-y log sigma(score) - (1 - y) log(1 - sigma(score))`.
pub fn cross_entropy(score: f64, target: f64) -> f64 {
    target * softplus(-score) + (1.0 - target) * softplus(score)
}

/// Gradient rows keyed by id; only rows touched by a batch are present.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseGradient {
    pub entities: BTreeMap<EntityId, (Vec<f64>, Vec<f64>)>,
    pub relations: BTreeMap<RelationId, (Vec<f64>, Vec<f64>)>,
}

impl SparseGradient {
    pub fn rows_mut(&mut self) -> impl Iterator<Item = (&mut Vec<f64>, &mut Vec<f64>)> {
        self.entities
            .values_mut()
            .chain(self.relations.values_mut())
            .map(|(re, im)| (re, im))
    }

    pub fn rows(&self) -> impl Iterator<Item = (&Vec<f64>, &Vec<f64>)> {
        self.entities
            .values()
            .chain(self.relations.values())
            .map(|(re, im)| (re, im))
    }

    pub fn is_finite(&self) -> bool {
        self.rows()
            .all(|(re, im)| re.iter().chain(im.iter()).all(|v| v.is_finite()))
    }
}

fn triple_norm(emb: &EmbeddingSet, t: &Triple) -> f64 {
    let (h, r, o) = (emb.entity(t.head), emb.relation(t.relation), emb.entity(t.tail));
    squared_norm(h.re, h.im) + squared_norm(r.re, r.im) + squared_norm(o.re, o.im)
}

/// Rows referenced by the batch, or every row under dense regularization.
fn touched_rows(
    labeled: &[LabeledExample],
    soft: &[(Triple, f64)],
    emb: &EmbeddingSet,
    mode: Regularization,
) -> (Vec<EntityId>, Vec<RelationId>) {
    match mode {
        Regularization::Dense => (
            (0..emb.num_entities() as u32).map(EntityId).collect(),
            (0..emb.num_relations() as u32).map(RelationId).collect(),
        ),
        Regularization::Sparse | Regularization::PerExample => {
            let mut ents = std::collections::BTreeSet::new();
            let mut rels = std::collections::BTreeSet::new();
            for t in labeled.iter().map(|l| &l.triple).chain(soft.iter().map(|(t, _)| t)) {
                ents.insert(t.head);
                ents.insert(t.tail);
                rels.insert(t.relation);
            }
            (ents.into_iter().collect(), rels.into_iter().collect())
        }
    }
}

fn squared_norm(re: &[f64], im: &[f64]) -> f64 {
    re.iter().chain(im).map(|v| v * v).sum()
}

/// Mean cross entropy on the labelled batch, plus mean cross entropy against
/// the soft labels (dropped when there are none), plus `l2` times the squared
/// norm of the regularized rows.
pub fn rectification_loss(
    labeled: &[LabeledExample],
    soft: &[(Triple, f64)],
    emb: &EmbeddingSet,
    l2: f64,
    mode: Regularization,
) -> f64 {
    let mut loss = 0.0;
    if !labeled.is_empty() {
        let sum: f64 = labeled
            .iter()
            .map(|l| cross_entropy(emb.score(&l.triple), l.target()))
            .sum();
        loss += sum / labeled.len() as f64;
    }
    if !soft.is_empty() {
        let sum: f64 = soft.iter().map(|(t, s)| cross_entropy(emb.score(t), *s)).sum();
        loss += sum / soft.len() as f64;
    }
    if l2 > 0.0 && mode == Regularization::PerExample {
        let mean = |ts: &mut dyn Iterator<Item = &Triple>, n: usize| {
            if n == 0 {
                0.0
            } else {
                ts.map(|t| triple_norm(emb, t)).sum::<f64>() / n as f64
            }
        };
        loss += l2 * mean(&mut labeled.iter().map(|l| &l.triple), labeled.len());
        loss += l2 * mean(&mut soft.iter().map(|(t, _)| t), soft.len());
    } else if l2 > 0.0 {
        let (ents, rels) = touched_rows(labeled, soft, emb, mode);
        let reg: f64 = ents
            .iter()
            .map(|&e| {
                let r = emb.entity(e);
                squared_norm(r.re, r.im)
            })
            .chain(rels.iter().map(|&k| {
                let r = emb.relation(k);
                squared_norm(r.re, r.im)
            }))
            .sum();
        loss += l2 * reg;
    }
    loss
}

/// Loss value and its gradient with respect to every touched row.
pub fn loss_and_gradient(
    labeled: &[LabeledExample],
    soft: &[(Triple, f64)],
    emb: &EmbeddingSet,
    l2: f64,
    mode: Regularization,
) -> (f64, SparseGradient) {
    let d = emb.dim();
    let mut grad = SparseGradient::default();
    let mut loss = 0.0;

    let per_example = if mode == Regularization::PerExample { l2 } else { 0.0 };
    let accumulate = |t: &Triple, target: f64, weight: f64, grad: &mut SparseGradient| -> f64 {
        let eta = emb.score(t);
        let decay = 2.0 * per_example * weight;
        // d loss / d score for cross entropy on a sigmoid
        let w = weight * (sigmoid(eta) - target);
        let h = emb.entity(t.head);
        let r = emb.relation(t.relation);
        let o = emb.entity(t.tail);
        {
            let (gre, gim) = grad
                .entities
                .entry(t.head)
                .or_insert_with(|| (vec![0.0; d], vec![0.0; d]));
            for m in 0..d {
                gre[m] += w * (r.re[m] * o.re[m] + r.im[m] * o.im[m]) + decay * h.re[m];
                gim[m] += w * (r.re[m] * o.im[m] - r.im[m] * o.re[m]) + decay * h.im[m];
            }
        }
        {
            let (gre, gim) = grad
                .relations
                .entry(t.relation)
                .or_insert_with(|| (vec![0.0; d], vec![0.0; d]));
            for m in 0..d {
                gre[m] += w * (h.re[m] * o.re[m] + h.im[m] * o.im[m]) + decay * r.re[m];
                gim[m] += w * (h.re[m] * o.im[m] - h.im[m] * o.re[m]) + decay * r.im[m];
            }
        }
        {
            let (gre, gim) = grad
                .entities
                .entry(t.tail)
                .or_insert_with(|| (vec![0.0; d], vec![0.0; d]));
            for m in 0..d {
                gre[m] += w * (h.re[m] * r.re[m] - h.im[m] * r.im[m]) + decay * o.re[m];
                gim[m] += w * (h.re[m] * r.im[m] + h.im[m] * r.re[m]) + decay * o.im[m];
            }
        }
        let penalty = if per_example > 0.0 { per_example * triple_norm(emb, t) } else { 0.0 };
        weight * (cross_entropy(eta, target) + penalty)
    };

    if !labeled.is_empty() {
        let weight = 1.0 / labeled.len() as f64;
        for l in labeled {
            loss += accumulate(&l.triple, l.target(), weight, &mut grad);
        }
    }
    if !soft.is_empty() {
        let weight = 1.0 / soft.len() as f64;
        for (t, s) in soft {
            loss += accumulate(t, *s, weight, &mut grad);
        }
    }

    if l2 > 0.0 && mode != Regularization::PerExample {
        let (ents, rels) = touched_rows(labeled, soft, emb, mode);
        for e in ents {
            let row = emb.entity(e);
            loss += l2 * squared_norm(row.re, row.im);
            let (gre, gim) = grad
                .entities
                .entry(e)
                .or_insert_with(|| (vec![0.0; d], vec![0.0; d]));
            for m in 0..d {
                gre[m] += 2.0 * l2 * row.re[m];
                gim[m] += 2.0 * l2 * row.im[m];
            }
        }
        for k in rels {
            let row = emb.relation(k);
            loss += l2 * squared_norm(row.re, row.im);
            let (gre, gim) = grad
                .relations
                .entry(k)
                .or_insert_with(|| (vec![0.0; d], vec![0.0; d]));
            for m in 0..d {
                gre[m] += 2.0 * l2 * row.re[m];
                gim[m] += 2.0 * l2 * row.im[m];
            }
        }
    }
    (loss, grad)
}
