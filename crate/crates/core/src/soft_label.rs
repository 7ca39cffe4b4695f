//! Soft labels for rule conclusions.
//!
//! Each unlabeled triple gets the label that stays closest (in squared
//! distance) to its current truth value while paying a hinge penalty `C` for
//! every grounding whose conditional truth falls short of 1, weighted by the
//! rule confidence. Because each grounding mentions exactly one unlabeled
//! triple and its conditional truth is affine in that triple's label, the
//! problem separates and has the closed form
//!
//! ```text
//! s(u) = clip01( phi(u) + C * sum_{g concludes u} confidence(g) * premise_truth(g) )
//! ```
//!
//! [`oracle_solve`] minimizes the same objective numerically and exists to
//! check [`predict_soft_labels`].

use std::collections::HashMap;

use crate::fuzzy;
use crate::model::EmbeddingSet;
use crate::rules::{Grounding, Rule};
use crate::store::Triple;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SoftLabel {
    pub triple: Triple,
    /// Truth value under the current embeddings.
    pub truth: f64,
    /// Predicted label in `[0, 1]`.
    pub label: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SoftLabels {
    labels: Vec<SoftLabel>,
    index: HashMap<Triple, usize>,
}

impl SoftLabels {
    fn from_vec(labels: Vec<SoftLabel>) -> Self {
        let index = labels.iter().enumerate().map(|(i, l)| (l.triple, i)).collect();
        SoftLabels { labels, index }
    }

    pub fn get(&self, t: &Triple) -> Option<f64> {
        self.index.get(t).map(|&i| self.labels[i].label)
    }

    pub fn iter(&self) -> impl Iterator<Item = &SoftLabel> {
        self.labels.iter()
    }

    pub fn as_slice(&self) -> &[SoftLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `(triple, label)` pairs for the rectification stage.
    pub fn targets(&self) -> Vec<(Triple, f64)> {
        self.labels.iter().map(|l| (l.triple, l.label)).collect()
    }
}

fn clip01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Product of the premise truth values under `emb`.
pub fn premise_truth(g: &Grounding, emb: &EmbeddingSet) -> f64 {
    fuzzy::premise_truth(g, |t| emb.truth_value(t))
}

/// Truth of `g` with premises from the embeddings and the conclusion from
/// the soft labels. `None` when the conclusion has no label.
pub fn conditional_truth(g: &Grounding, emb: &EmbeddingSet, labels: &SoftLabels) -> Option<f64> {
    let s = labels.get(&g.conclusion)?;
    Some(fuzzy::implication(premise_truth(g, emb), s))
}

/// Closed-form soft labels for a batch. Contributions of groundings sharing
/// a conclusion are summed before the single clip.
///
/// Panics if a grounding's conclusion is missing from `unlabeled`.
pub fn predict_soft_labels(
    unlabeled: &[Triple],
    groundings: &[&Grounding],
    rules: &[Rule],
    emb: &EmbeddingSet,
    c: f64,
) -> SoftLabels {
    let position: HashMap<Triple, usize> = unlabeled.iter().enumerate().map(|(i, t)| (*t, i)).collect();
    let mut push = vec![0.0; unlabeled.len()];
    for g in groundings {
        let i = *position
            .get(&g.conclusion)
            .expect("grounding conclusion missing from the unlabeled batch");
        push[i] += rules[g.rule].confidence * premise_truth(g, emb);
    }
    let labels = unlabeled
        .iter()
        .zip(push)
        .map(|(t, push)| {
            let truth = emb.truth_value(t);
            SoftLabel {
                triple: *t,
                truth,
                label: clip01(truth + c * push),
            }
        })
        .collect();
    SoftLabels::from_vec(labels)
}

/// `1/2 sum (s - phi)^2 + C sum_g max(0, confidence * (1 - pi(g | s)))`
/// evaluated at `labels`; the slack variables are at their optimum given `s`.
pub fn projection_objective(labels: &SoftLabels, groundings: &[&Grounding], rules: &[Rule], emb: &EmbeddingSet, c: f64) -> f64 {
    let fit: f64 = labels.iter().map(|l| 0.5 * (l.label - l.truth).powi(2)).sum();
    let slack: f64 = groundings
        .iter()
        .map(|g| {
            let pi = fuzzy::grounding_truth(g, |t| {
                if *t == g.conclusion {
                    labels.get(t).expect("conclusion labelled")
                } else {
                    emb.truth_value(t)
                }
            });
            (rules[g.rule].confidence * (1.0 - pi)).max(0.0)
        })
        .sum();
    fit + c * slack
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleError {
    pub iterations: usize,
    pub last_step: f64,
}

impl std::fmt::Display for OracleError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "projected subgradient did not converge after {} iterations (last step {:e})",
            self.iterations, self.last_step
        )
    }
}

impl std::error::Error for OracleError {}

const ORACLE_STEP: f64 = 0.5;
const ORACLE_TOL: f64 = 1e-12;
const ORACLE_MAX_ITERS: usize = 200_000;

/// Minimizes the slack-penalized projection objective by projected
/// subgradient descent over the box `[0, 1]^|U|`. Intended for small
/// instances.
///
/// Conditional truths are evaluated through the generic connective
/// evaluator rather than the closed-form gradient: each grounding's truth is
/// affine in its conclusion label, so its slope is read off as
/// `pi(s = 1) - pi(s = 0)`.
pub fn oracle_solve(
    unlabeled: &[Triple],
    groundings: &[&Grounding],
    rules: &[Rule],
    emb: &EmbeddingSet,
    c: f64,
) -> Result<SoftLabels, OracleError> {
    let position: HashMap<Triple, usize> = unlabeled.iter().enumerate().map(|(i, t)| (*t, i)).collect();
    let truth: Vec<f64> = unlabeled.iter().map(|t| emb.truth_value(t)).collect();

    struct Constraint {
        var: usize,
        weight: f64,
        offset: f64,
        slope: f64,
    }
    let constraints: Vec<Constraint> = groundings
        .iter()
        .map(|g| {
            let at = |s: f64| {
                fuzzy::grounding_truth(g, |t| if *t == g.conclusion { s } else { emb.truth_value(t) })
            };
            let offset = at(0.0);
            Constraint {
                var: position[&g.conclusion],
                weight: rules[g.rule].confidence,
                offset,
                slope: at(1.0) - offset,
            }
        })
        .collect();

    let mut s: Vec<f64> = truth.iter().map(|&p| clip01(p)).collect();
    let mut grad = vec![0.0; s.len()];
    let mut last_step = f64::INFINITY;
    for iter in 0..ORACLE_MAX_ITERS {
        for (g, (si, pi)) in grad.iter_mut().zip(s.iter().zip(&truth)) {
            *g = si - pi;
        }
        for k in &constraints {
            let violation = k.weight * (1.0 - k.offset - k.slope * s[k.var]);
            if violation >= 0.0 {
                grad[k.var] -= c * k.weight * k.slope;
            }
        }
        last_step = 0.0;
        for (si, g) in s.iter_mut().zip(&grad) {
            let next = clip01(*si - ORACLE_STEP * g);
            last_step = last_step.max((next - *si).abs());
            *si = next;
        }
        if last_step < ORACLE_TOL && iter > 0 {
            let labels = unlabeled
                .iter()
                .zip(s.iter().zip(&truth))
                .map(|(t, (&label, &truth))| SoftLabel {
                    triple: *t,
                    truth,
                    label,
                })
                .collect();
            return Ok(SoftLabels::from_vec(labels));
        }
    }
    Err(OracleError {
        iterations: ORACLE_MAX_ITERS,
        last_step,
    })
}
