//! Knowledge-graph embeddings learned jointly from observed triples and soft
//! Horn rules.
//!
//! Entities and relations get complex-valued embeddings scored by
//! `Re(<e_h, r, conj(e_t)>)`. Rules are propositionalized against the
//! observed triples; the conclusions of their groundings become unlabeled
//! triples. Training alternates, per mini-batch, between predicting soft
//! labels for those triples (a closed-form rule-constrained projection of the
//! current truth values) and an AdaGrad step on the cross-entropy against
//! both hard and soft labels. Evaluation uses filtered link-prediction
//! ranking.
//!
//! ```no_run
//! use softrule_kge::prelude::*;
//!
//! let kg = KnowledgeGraph::load("train.tsv", None, Some("test.tsv".as_ref()))?;
//! let rules = parse_rules("rules.txt", kg.vocab(), 0.8)?;
//! let index = GroundingIndex::new(propositionalize(&rules, &kg).groundings);
//! let outcome = train(&kg, &rules, &index, &TrainConfig::default())?;
//! let report = evaluate(&outcome.embeddings, kg.test(), &kg, TieMode::Mid)?;
//! println!("{}", report.to_table());
//! # Ok::<(), softrule_kge::Error>(())
//! ```

pub mod checkpoint;
pub mod config;
pub mod error;
pub mod eval;
pub mod fuzzy;
pub mod model;
pub mod pipeline;
pub mod rules;
pub mod soft_label;
pub mod store;
pub mod synthetic;
pub mod train;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::checkpoint::Checkpoint;
    pub use crate::config::RunConfig;
    pub use crate::error::{Error, Result};
    pub use crate::eval::{evaluate, rank_entity, EvalReport, Slot, TieMode};
    pub use crate::model::EmbeddingSet;
    pub use crate::rules::{parse_rules, propositionalize, Grounding, GroundingIndex, Rule};
    pub use crate::soft_label::{predict_soft_labels, SoftLabels};
    pub use crate::store::{EntityId, KnowledgeGraph, RelationId, Triple, VocabMode, Vocabularies};
    pub use crate::train::{train, train_baseline, TrainConfig, TrainOutcome};
}
