//! Parses soft Horn rules and propositionalizes them against a graph: every
//! grounding whose premises are observed and whose conclusion is not.
//!
//! cargo run --example ground_rules

use std::io::Cursor;

use softrule_kge::pipeline::{write_groundings, GroundStats};
use softrule_kge::rules::{propositionalize, read_rules, GroundingIndex};
use softrule_kge::store::{KnowledgeGraph, VocabMode, Vocabularies};

const TRAIN: &str = "\
alice\tborn_in\tparis
paris\tcity_of\tfrance
bob\tborn_in\tlyon
lyon\tcity_of\tfrance
bob\tnationality\tfrance
carol\tmarried_to\tdave
dave\tnationality\titaly
";

const RULES: &str = "\
born_in(x,z) & city_of(z,y) => nationality(x,y)\t0.9
married_to(x,y) => married_to(y,x)\t1.0
married_to(x,z) & nationality(z,y) => nationality(x,y)\t0.6
nationality(x,y) => born_in(x,y)\t0.3
";

fn main() -> softrule_kge::Result<()> {
    let mut vocab = Vocabularies::new();
    let train = vocab.read_triples(Cursor::new(TRAIN), "train", VocabMode::Extend)?.triples;
    let kg = KnowledgeGraph::new(vocab, train, Vec::new(), Vec::new());

    // rules below the threshold are dropped while parsing
    let rules = read_rules(Cursor::new(RULES), "rules", kg.vocab(), 0.5)?;
    for r in &rules {
        println!("rule  {}", r.display(kg.vocab()));
    }

    let p = propositionalize(&rules, &kg);
    println!("\n{}\n", GroundStats::new(&kg, &rules, &p));
    write_groundings(&mut std::io::stdout(), &p.groundings, kg.vocab()).expect("stdout");

    // per-batch matching: only groundings whose premises are all in the batch fire
    let index = GroundingIndex::new(p.groundings);
    let batch = &kg.train()[..2];
    let fired = index.match_batch(batch);
    println!("\nbatch of {} positives fires {} grounding(s):", batch.len(), fired.groundings.len());
    kg.vocab().write_triples(&mut std::io::stdout(), &fired.unlabeled).expect("stdout");
    Ok(())
}
