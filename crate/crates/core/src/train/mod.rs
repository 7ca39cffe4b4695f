//! Alternating training loop.
//!
//! Each iteration takes one mini-batch of observed positives, adds runtime
//! negatives, looks up the groundings the batch fires, predicts soft labels
//! for their conclusions from the current embeddings, and then takes
//! `inner_epochs` AdaGrad steps on the joint cross-entropy loss.

mod adagrad;
mod config;
mod loss;
mod sampling;

use std::fmt;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use adagrad::{normalize, AdaGradState};
pub use config::{GradNorm, Regularization, TrainConfig};
pub use loss::{cross_entropy, loss_and_gradient, rectification_loss, SparseGradient};
pub use sampling::{sample_negatives, LabeledExample, MAX_RETRIES};

use crate::error::{Error, Result};
use crate::eval;
use crate::model::EmbeddingSet;
use crate::rules::{GroundingIndex, Rule};
use crate::soft_label::predict_soft_labels;
use crate::store::{KnowledgeGraph, Triple};

/// Salt separating the sampling stream from the initialization stream.
const SAMPLING_STREAM: u64 = 0x5eed_5a4d_911e_0001;

/// Runs `inner_epochs` gradient passes on one batch and returns the loss
/// measured before the first pass.
pub fn rectify(
    labeled: &[LabeledExample],
    soft: &[(Triple, f64)],
    emb: &mut EmbeddingSet,
    adagrad: &mut AdaGradState,
    config: &TrainConfig,
) -> Result<f64> {
    let mut first = None;
    for pass in 0..config.inner_epochs {
        let (loss, mut grad) = loss_and_gradient(labeled, soft, emb, config.l2, config.regularization);
        if !loss.is_finite() || !grad.is_finite() {
            return Err(Error::Training(format!(
                "non-finite loss or gradient at inner pass {pass} (loss {loss}, {} labelled, {} soft)",
                labeled.len(),
                soft.len()
            )));
        }
        first.get_or_insert(loss);
        normalize(&mut grad, config.grad_norm);
        adagrad.step(emb, &grad, config.learning_rate);
    }
    if !emb.is_finite() {
        return Err(Error::Training("embeddings became non-finite".into()));
    }
    Ok(first.unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_loss: f64,
    pub valid_mrr: Option<f64>,
}

impl fmt::Display for EpochRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "epoch={}\tloss={:.6}", self.epoch, self.mean_loss)?;
        if let Some(mrr) = self.valid_mrr {
            write!(f, "\tvalid_mrr={mrr:.6}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    /// Loss of every mini-batch step, in order.
    pub iteration_losses: Vec<f64>,
    pub epochs: Vec<EpochRecord>,
    /// Epoch whose embeddings were returned.
    pub best_epoch: usize,
    pub best_valid_mrr: Option<f64>,
    pub stopped_early: bool,
    /// Soft-labelled triples seen across all iterations.
    pub soft_labelled: usize,
}

impl TrainingLog {
    pub fn write_lines<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        for e in &self.epochs {
            writeln!(out, "{e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub embeddings: EmbeddingSet,
    pub log: TrainingLog,
}

/// Splits `n` shuffled positions into `batches` contiguous chunks whose sizes
/// differ by at most one.
fn batch_bounds(n: usize, batches: usize) -> Vec<(usize, usize)> {
    let batches = batches.min(n).max(1);
    let (base, extra) = (n / batches, n % batches);
    let mut start = 0;
    (0..batches)
        .map(|b| {
            let len = base + usize::from(b < extra);
            let r = (start, start + len);
            start += len;
            r
        })
        .collect()
}

/// Positives plus `negatives` corruptions of each, interleaved.
fn labeled_batch<R: Rng>(positives: &[Triple], kg: &KnowledgeGraph, negatives: usize, rng: &mut R) -> Vec<LabeledExample> {
    let mut out = Vec::with_capacity(positives.len() * (1 + negatives));
    for p in positives {
        out.push(LabeledExample::positive(*p));
        out.extend(sample_negatives(p, kg, negatives, rng));
    }
    out
}

fn check_inputs(kg: &KnowledgeGraph, config: &TrainConfig) -> Result<()> {
    config.validate()?;
    if kg.train().is_empty() {
        return Err(Error::Config("training set is empty".into()));
    }
    if kg.num_entities() < 2 {
        return Err(Error::Config("need at least two entities".into()));
    }
    Ok(())
}

struct EarlyStop {
    best: Option<(f64, usize, EmbeddingSet)>,
    bad_rounds: usize,
}

impl EarlyStop {
    fn new() -> Self {
        EarlyStop {
            best: None,
            bad_rounds: 0,
        }
    }

    /// Records a validation result; returns true when patience is exhausted.
    fn observe(&mut self, mrr: f64, epoch: usize, emb: &EmbeddingSet, patience: usize) -> bool {
        match &self.best {
            Some((best, _, _)) if mrr <= *best => {
                self.bad_rounds += 1;
                self.bad_rounds >= patience
            }
            _ => {
                self.best = Some((mrr, epoch, emb.clone()));
                self.bad_rounds = 0;
                false
            }
        }
    }
}

/// Alternating soft-label / rectification training. An empty `index`
/// reduces to plain logistic-loss training.
pub fn train(kg: &KnowledgeGraph, rules: &[Rule], index: &GroundingIndex, config: &TrainConfig) -> Result<TrainOutcome> {
    check_inputs(kg, config)?;
    let mut emb = EmbeddingSet::init_with_scale(
        kg.num_entities(),
        kg.num_relations(),
        config.dim,
        config.seed,
        config.init_scale,
    );
    let mut adagrad = AdaGradState::new(&emb, config.adagrad_eps);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ SAMPLING_STREAM);
    let mut order: Vec<usize> = (0..kg.train().len()).collect();
    let bounds = batch_bounds(order.len(), config.batches);
    let mut log = TrainingLog::default();
    let mut stop = EarlyStop::new();
    let validate = config.valid_every > 0 && !kg.valid().is_empty();

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for &(start, end) in &bounds {
            let positives: Vec<Triple> = order[start..end].iter().map(|&i| kg.train()[i]).collect();
            let labeled = labeled_batch(&positives, kg, config.negatives, &mut rng);
            let fired = index.match_batch(&positives);
            let soft = predict_soft_labels(&fired.unlabeled, &fired.groundings, rules, &emb, config.slack_c).targets();
            log.soft_labelled += soft.len();
            let loss = rectify(&labeled, &soft, &mut emb, &mut adagrad, config)
                .map_err(|e| Error::Training(format!("epoch {epoch}, batch at {start}: {e}")))?;
            log.iteration_losses.push(loss);
            epoch_loss += loss;
        }
        let mut record = EpochRecord {
            epoch,
            mean_loss: epoch_loss / bounds.len() as f64,
            valid_mrr: None,
        };
        let mut exhausted = false;
        if validate && epoch % config.valid_every == 0 {
            let mrr = eval::evaluate(&emb, kg.valid(), kg, config.tie_mode)?.mrr;
            record.valid_mrr = Some(mrr);
            exhausted = stop.observe(mrr, epoch, &emb, config.patience.max(1));
        }
        log::info!("{record}");
        log.epochs.push(record);
        if exhausted {
            log.stopped_early = true;
            break;
        }
    }

    match stop.best {
        Some((mrr, epoch, best)) => {
            log.best_epoch = epoch;
            log.best_valid_mrr = Some(mrr);
            Ok(TrainOutcome { embeddings: best, log })
        }
        None => {
            log.best_epoch = log.epochs.len();
            Ok(TrainOutcome { embeddings: emb, log })
        }
    }
}

/// Plain logistic-loss trainer on observed triples with runtime negatives:
/// the same schedule, sampler and update as [`train`] without any rule
/// stage.
pub fn train_baseline(kg: &KnowledgeGraph, config: &TrainConfig) -> Result<TrainOutcome> {
    check_inputs(kg, config)?;
    let mut emb = EmbeddingSet::init_with_scale(
        kg.num_entities(),
        kg.num_relations(),
        config.dim,
        config.seed,
        config.init_scale,
    );
    let mut adagrad = AdaGradState::new(&emb, config.adagrad_eps);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ SAMPLING_STREAM);
    let mut order: Vec<usize> = (0..kg.train().len()).collect();
    let bounds = batch_bounds(order.len(), config.batches);
    let mut log = TrainingLog::default();
    let mut stop = EarlyStop::new();
    let validate = config.valid_every > 0 && !kg.valid().is_empty();

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for &(start, end) in &bounds {
            let positives: Vec<Triple> = order[start..end].iter().map(|&i| kg.train()[i]).collect();
            let labeled = labeled_batch(&positives, kg, config.negatives, &mut rng);
            let loss = rectify(&labeled, &[], &mut emb, &mut adagrad, config)?;
            log.iteration_losses.push(loss);
            epoch_loss += loss;
        }
        let mut record = EpochRecord {
            epoch,
            mean_loss: epoch_loss / bounds.len() as f64,
            valid_mrr: None,
        };
        let mut exhausted = false;
        if validate && epoch % config.valid_every == 0 {
            let mrr = eval::evaluate(&emb, kg.valid(), kg, config.tie_mode)?.mrr;
            record.valid_mrr = Some(mrr);
            exhausted = stop.observe(mrr, epoch, &emb, config.patience.max(1));
        }
        log.epochs.push(record);
        if exhausted {
            log.stopped_early = true;
            break;
        }
    }

    match stop.best {
        Some((mrr, epoch, best)) => {
            log.best_epoch = epoch;
            log.best_valid_mrr = Some(mrr);
            Ok(TrainOutcome { embeddings: best, log })
        }
        None => {
            log.best_epoch = log.epochs.len();
            Ok(TrainOutcome { embeddings: emb, log })
        }
    }
}
