use rand::Rng;

use crate::store::{EntityId, KnowledgeGraph, Triple};

/// Draws per slot before an observed corruption is accepted anyway.
pub const MAX_RETRIES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledExample {
    pub triple: Triple,
    pub positive: bool,
}

impl LabeledExample {
    pub fn positive(triple: Triple) -> Self {
        LabeledExample {
            triple,
            positive: true,
        }
    }

    pub fn negative(triple: Triple) -> Self {
        LabeledExample {
            triple,
            positive: false,
        }
    }

    pub fn target(&self) -> f64 {
        if self.positive {
            1.0
        } else {
            0.0
        }
    }
}

/// Entity drawn uniformly from all entities except `not`.
fn other_entity<R: Rng + ?Sized>(rng: &mut R, n: usize, not: EntityId) -> EntityId {
    let k = rng.gen_range(0..n - 1) as u32;
    EntityId(if k >= not.0 { k + 1 } else { k })
}

/// `count` negatives for `positive`, each replacing the head or the tail
/// (fair coin) with a different entity. Corruptions that land on an
/// observed triple are redrawn up to [`MAX_RETRIES`] times.
///
/// Requires at least two entities.
pub fn sample_negatives<R: Rng + ?Sized>(
    positive: &Triple,
    kg: &KnowledgeGraph,
    count: usize,
    rng: &mut R,
) -> Vec<LabeledExample> {
    let n = kg.num_entities();
    assert!(n >= 2, "negative sampling needs at least two entities");
    (0..count)
        .map(|_| {
            let corrupt_head = rng.gen_bool(0.5);
            let mut candidate = *positive;
            for attempt in 0..=MAX_RETRIES {
                candidate = *positive;
                if corrupt_head {
                    candidate.head = other_entity(rng, n, positive.head);
                } else {
                    candidate.tail = other_entity(rng, n, positive.tail);
                }
                if !kg.contains(&candidate) {
                    break;
                }
                if attempt == MAX_RETRIES {
                    log::debug!("accepting observed corruption after {MAX_RETRIES} retries");
                }
            }
            LabeledExample::negative(candidate)
        })
        .collect()
}
