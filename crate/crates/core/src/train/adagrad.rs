use crate::model::EmbeddingSet;

use super::config::GradNorm;
use super::loss::SparseGradient;

/// Accumulated squared gradients, one per embedding parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaGradState {
    acc: EmbeddingSet,
    eps: f64,
}

impl AdaGradState {
    pub fn new(like: &EmbeddingSet, eps: f64) -> Self {
        AdaGradState {
            acc: EmbeddingSet::zeros(like.num_entities(), like.num_relations(), like.dim()),
            eps,
        }
    }

    pub fn accumulators(&self) -> &EmbeddingSet {
        &self.acc
    }

    /// `theta -= lr * g / sqrt(acc + eps)` after `acc += g^2`, for every row
    /// present in `grad`.
    pub fn step(&mut self, emb: &mut EmbeddingSet, grad: &SparseGradient, lr: f64) {
        let eps = self.eps;
        let update = |theta: &mut [f64], acc: &mut [f64], g: &[f64]| {
            for ((p, a), &gi) in theta.iter_mut().zip(acc.iter_mut()).zip(g) {
                *a += gi * gi;
                *p -= lr * gi / (*a + eps).sqrt();
            }
        };
        for (&e, (gre, gim)) in &grad.entities {
            let (are, aim) = self.acc.entity_mut(e);
            let (pre, pim) = emb.entity_mut(e);
            update(pre, are, gre);
            update(pim, aim, gim);
        }
        for (&k, (gre, gim)) in &grad.relations {
            let (are, aim) = self.acc.relation_mut(k);
            let (pre, pim) = emb.relation_mut(k);
            update(pre, are, gre);
            update(pim, aim, gim);
        }
    }
}

/// Rescales `grad` in place according to `mode`.
pub fn normalize(grad: &mut SparseGradient, mode: GradNorm) {
    match mode {
        GradNorm::None => {}
        GradNorm::Row => {
            for (re, im) in grad.rows_mut() {
                let norm = re.iter().chain(im.iter()).map(|v| v * v).sum::<f64>().sqrt();
                if norm > 1.0 {
                    re.iter_mut().chain(im.iter_mut()).for_each(|v| *v /= norm);
                }
            }
        }
        GradNorm::Global => {
            let norm = grad
                .rows()
                .flat_map(|(re, im)| re.iter().chain(im.iter()))
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt();
            if norm > 1.0 {
                for (re, im) in grad.rows_mut() {
                    re.iter_mut().chain(im.iter_mut()).for_each(|v| *v /= norm);
                }
            }
        }
    }
}
