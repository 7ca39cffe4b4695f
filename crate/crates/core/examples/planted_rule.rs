//! Trains on a synthetic graph with one planted rule, once with the rule and
//! once without, and compares filtered MRR on the held-out conclusions.
//!
//! cargo run --release --example planted_rule -- [seed] [epochs]

use softrule_kge::eval::{evaluate, TieMode};
use softrule_kge::rules::{propositionalize, GroundingIndex};
use softrule_kge::synthetic::PlantedRuleSpec;
use softrule_kge::train::{train, TrainConfig};

fn main() -> softrule_kge::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);
    let epochs: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(50);

    let data = PlantedRuleSpec { seed, ..Default::default() }.generate();
    let kg = &data.kg;
    let grounded = propositionalize(&data.rules, kg);
    println!(
        "{} entities, {} training triples, {} groundings, {} held-out conclusions",
        kg.num_entities(),
        kg.train().len(),
        grounded.groundings.len(),
        kg.test().len()
    );

    let config = TrainConfig {
        dim: 20,
        negatives: 5,
        learning_rate: 0.1,
        l2: 1e-5,
        slack_c: 0.1,
        batches: 10,
        max_epochs: epochs,
        valid_every: 0,
        seed,
        ..Default::default()
    };

    let with_rules = train(kg, &data.rules, &GroundingIndex::new(grounded.groundings), &config)?;
    let without = train(kg, &[], &GroundingIndex::new(Vec::new()), &config)?;

    let a = evaluate(&with_rules.embeddings, kg.test(), kg, TieMode::Mid)?;
    let b = evaluate(&without.embeddings, kg.test(), kg, TieMode::Mid)?;
    println!("with rule    MRR {:.4}  HITS@10 {:.4}", a.mrr, a.hits_at(10));
    println!("without rule MRR {:.4}  HITS@10 {:.4}", b.mrr, b.hits_at(10));
    println!("gap {:+.4}", a.mrr - b.mrr);
    Ok(())
}
