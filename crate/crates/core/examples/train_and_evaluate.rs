//! End-to-end library use: load train / valid / test files and a rule file,
//! train with early stopping on validation MRR, evaluate on test and save a
//! checkpoint.
//!
//! cargo run --release --example train_and_evaluate -- DATA_DIR [epochs]
//!
//! DATA_DIR holds train.tsv, valid.tsv, test.tsv and optionally rules.txt.
//! Without arguments a synthetic graph is written to a temporary directory
//! first.

use std::fs;
use std::path::{Path, PathBuf};

use softrule_kge::checkpoint::Checkpoint;
use softrule_kge::eval::{evaluate, TieMode};
use softrule_kge::rules::{parse_rules, propositionalize, GroundingIndex};
use softrule_kge::store::KnowledgeGraph;
use softrule_kge::synthetic::PlantedRuleSpec;
use softrule_kge::train::{train, TrainConfig};

/// Writes a planted-rule graph as TSV files, with a third of the held-out
/// conclusions used for validation.
fn write_synthetic(dir: &Path) -> std::io::Result<()> {
    let data = PlantedRuleSpec::default().generate();
    let v = data.kg.vocab();
    let (valid, test) = data.kg.test().split_at(data.kg.test().len() / 3);
    for (name, triples) in [("train.tsv", data.kg.train()), ("valid.tsv", valid), ("test.tsv", test)] {
        let mut buf = Vec::new();
        v.write_triples(&mut buf, triples)?;
        fs::write(dir.join(name), buf)?;
    }
    let rules: String = data.rules.iter().map(|r| format!("{}\n", r.display(v))).collect();
    fs::write(dir.join("rules.txt"), rules)
}

fn main() -> softrule_kge::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = match args.next() {
        Some(d) => PathBuf::from(d),
        None => {
            let d = std::env::temp_dir().join(format!("train-and-evaluate-{}", std::process::id()));
            fs::create_dir_all(&d).and_then(|_| write_synthetic(&d)).expect("write synthetic data");
            println!("synthetic data in {}", d.display());
            d
        }
    };
    let epochs: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(50);

    let kg = KnowledgeGraph::load(dir.join("train.tsv"), Some(&dir.join("valid.tsv")), Some(&dir.join("test.tsv")))?;
    let rules_path = dir.join("rules.txt");
    let rules = if rules_path.is_file() { parse_rules(&rules_path, kg.vocab(), 0.8)? } else { Vec::new() };
    let grounded = propositionalize(&rules, &kg);
    println!(
        "{} entities, {} relations, {} train / {} valid / {} test, {} rules, {} groundings",
        kg.num_entities(),
        kg.num_relations(),
        kg.train().len(),
        kg.valid().len(),
        kg.test().len(),
        rules.len(),
        grounded.groundings.len()
    );

    let config = TrainConfig {
        dim: 20,
        negatives: 5,
        learning_rate: 0.1,
        l2: 1e-5,
        slack_c: 0.1,
        batches: 10,
        max_epochs: epochs,
        valid_every: 5,
        ..Default::default()
    };
    let outcome = train(&kg, &rules, &GroundingIndex::new(grounded.groundings), &config)?;
    for e in outcome.log.epochs.iter().filter(|e| e.valid_mrr.is_some()) {
        println!("{e}");
    }
    println!(
        "best epoch {} (stopped early: {}), {} soft labels used",
        outcome.log.best_epoch, outcome.log.stopped_early, outcome.log.soft_labelled
    );

    let report = evaluate(&outcome.embeddings, kg.test(), &kg, TieMode::Mid)?;
    print!("{}", report.to_table());

    let snapshot = toml::to_string(&config).expect("config serializes");
    let path = dir.join("best.ckpt");
    Checkpoint::new(outcome.embeddings, kg.vocab(), snapshot).save(&path)?;
    println!("checkpoint written to {}", path.display());
    Ok(())
}
