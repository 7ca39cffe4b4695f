use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::TieMode;

/// How per-batch gradients are rescaled before the AdaGrad step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradNorm {
    /// Rescale each embedding row (real and imaginary parts together) to
    /// unit L2 norm when its norm exceeds 1.
    Row,
    /// Rescale the whole batch gradient when its norm exceeds 1.
    Global,
    None,
}

/// Which parameters the L2 penalty covers on each update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regularization {
    /// Only rows referenced by the batch.
    Sparse,
    /// Every row, every update.
    Dense,
    /// Each example adds the squared norms of its three rows, weighted like
    /// its cross-entropy term (mean over the labelled or soft batch).
    PerExample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub dim: usize,
    /// Negatives per positive.
    pub negatives: usize,
    pub learning_rate: f64,
    /// L2 coefficient.
    pub l2: f64,
    /// Slack penalty of the soft-label projection.
    pub slack_c: f64,
    /// Gradient passes per mini-batch.
    pub inner_epochs: usize,
    /// Mini-batches per epoch.
    pub batches: usize,
    pub max_epochs: usize,
    /// Validate every this many epochs; 0 disables early stopping.
    pub valid_every: usize,
    /// Validations without improvement before stopping.
    pub patience: usize,
    pub seed: u64,
    pub grad_norm: GradNorm,
    pub regularization: Regularization,
    pub init_scale: f64,
    pub adagrad_eps: f64,
    /// Tie convention used for validation MRR.
    pub tie_mode: TieMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 200,
            negatives: 10,
            learning_rate: 0.5,
            l2: 0.01,
            slack_c: 0.01,
            inner_epochs: 1,
            batches: 100,
            max_epochs: 1000,
            valid_every: 50,
            patience: 3,
            seed: 0,
            grad_norm: GradNorm::Row,
            regularization: Regularization::Sparse,
            init_scale: crate::model::DEFAULT_INIT_SCALE,
            adagrad_eps: 1e-8,
            tie_mode: TieMode::Mid,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_owned()));
        if self.dim == 0 {
            return fail("dim must be >= 1");
        }
        if self.negatives == 0 {
            return fail("negatives must be >= 1");
        }
        if self.max_epochs == 0 {
            return fail("max_epochs must be >= 1");
        }
        if self.inner_epochs == 0 {
            return fail("inner_epochs must be >= 1");
        }
        if self.batches == 0 {
            return fail("batches must be >= 1");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be a finite value >= 0");
        }
        if !(self.slack_c >= 0.0 && self.slack_c.is_finite()) {
            return fail("slack_c must be a finite value >= 0");
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return fail("l2 must be a finite value >= 0");
        }
        if !(self.init_scale > 0.0 && self.adagrad_eps > 0.0) {
            return fail("init_scale and adagrad_eps must be positive");
        }
        Ok(())
    }
}
