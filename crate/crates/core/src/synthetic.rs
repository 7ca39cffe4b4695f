//! Synthetic graph with one planted rule `premise(x,y) => conclusion(x,y)`.
//!
//! Every premise pair is observed. Most conclusion pairs copy a premise pair;
//! a configurable share of those copies is held out as the test split. The
//! rule's groundings therefore conclude the held-out triples plus the premise
//! pairs the rule wrongly extends. Background relations add unrelated
//! structure.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rules::{Atom, Rule, Var};
use crate::store::{EntityId, KnowledgeGraph, RelationId, Triple, Vocabularies};

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedRuleSpec {
    pub entities: usize,
    pub premise_pairs: usize,
    /// Share of conclusion pairs copied from premise pairs.
    pub rule_precision: f64,
    /// Share of copied conclusions withheld for testing.
    pub holdout: f64,
    pub background_relations: usize,
    pub background_pairs: usize,
    pub confidence: f64,
    pub seed: u64,
}

impl Default for PlantedRuleSpec {
    fn default() -> Self {
        PlantedRuleSpec {
            entities: 200,
            premise_pairs: 600,
            rule_precision: 0.9,
            holdout: 0.3,
            background_relations: 3,
            background_pairs: 400,
            confidence: 0.9,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlantedRuleData {
    /// Training triples as `train`, held-out conclusions as `test`.
    pub kg: KnowledgeGraph,
    pub rules: Vec<Rule>,
    pub premise: RelationId,
    pub conclusion: RelationId,
}

fn random_pairs<R: Rng>(rng: &mut R, n_entities: usize, count: usize, taken: &mut HashSet<(u32, u32)>) -> Vec<(u32, u32)> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let h = rng.gen_range(0..n_entities as u32);
        let t = rng.gen_range(0..n_entities as u32);
        if h != t && taken.insert((h, t)) {
            out.push((h, t));
        }
    }
    out
}

impl PlantedRuleSpec {
    pub fn generate(&self) -> PlantedRuleData {
        let max_pairs = self.entities * (self.entities - 1);
        assert!(
            self.premise_pairs * 2 + self.background_pairs <= max_pairs / 2,
            "graph too dense for the requested pair counts"
        );
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut vocab = Vocabularies::new();
        for i in 0..self.entities {
            vocab.entities.intern(&format!("e{i}"));
        }
        let premise = RelationId(vocab.relations.intern("premise"));
        let conclusion = RelationId(vocab.relations.intern("conclusion"));
        let background: Vec<RelationId> = (0..self.background_relations)
            .map(|i| RelationId(vocab.relations.intern(&format!("background{i}"))))
            .collect();

        let t = |h: u32, r: RelationId, o: u32| Triple::new(EntityId(h), r, EntityId(o));
        let mut train = Vec::new();
        let mut test = Vec::new();

        let mut taken = HashSet::new();
        let pairs = random_pairs(&mut rng, self.entities, self.premise_pairs, &mut taken);
        train.extend(pairs.iter().map(|&(h, o)| t(h, premise, o)));

        let copied = (self.premise_pairs as f64 * self.rule_precision).round() as usize;
        let mut copies = pairs.clone();
        copies.shuffle(&mut rng);
        copies.truncate(copied);
        let held = (copies.len() as f64 * self.holdout).round() as usize;
        test.extend(copies[..held].iter().map(|&(h, o)| t(h, conclusion, o)));
        train.extend(copies[held..].iter().map(|&(h, o)| t(h, conclusion, o)));
        let extra = self.premise_pairs - copied;
        let noise = random_pairs(&mut rng, self.entities, extra, &mut taken);
        train.extend(noise.iter().map(|&(h, o)| t(h, conclusion, o)));

        for &r in &background {
            let mut own = HashSet::new();
            for (h, o) in random_pairs(&mut rng, self.entities, self.background_pairs, &mut own) {
                train.push(t(h, r, o));
            }
        }
        train.shuffle(&mut rng);

        let atom = |relation| Atom {
            relation,
            arg1: Var::X,
            arg2: Var::Y,
        };
        let rules = vec![Rule {
            premise: vec![atom(premise)],
            conclusion: atom(conclusion),
            confidence: self.confidence,
        }];
        PlantedRuleData {
            kg: KnowledgeGraph::new(vocab, train, Vec::new(), test),
            rules,
            premise,
            conclusion,
        }
    }
}
