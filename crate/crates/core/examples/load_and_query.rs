//! Loads triples into interned vocabularies and queries the indexed store.
//!
//! cargo run --example load_and_query -- [train.tsv]
//!
//! Without an argument a small built-in graph is used.

use std::io::Cursor;

use softrule_kge::store::{KnowledgeGraph, VocabMode, Vocabularies};

const TOY: &str = "\
# head\trelation\ttail
alice\tborn_in\tparis
paris\tcity_of\tfrance
bob\tborn_in\tlyon
lyon\tcity_of\tfrance
bob\tnationality\tfrance
bob\tnationality\tfrance
";

fn main() -> softrule_kge::Result<()> {
    let mut vocab = Vocabularies::new();
    let loaded = match std::env::args().nth(1) {
        Some(path) => vocab.load_triples(&path, VocabMode::Extend)?,
        None => vocab.read_triples(Cursor::new(TOY), "built-in", VocabMode::Extend)?,
    };
    println!(
        "{} triples ({} duplicate lines dropped), {} entities, {} relations",
        loaded.triples.len(),
        loaded.duplicates,
        vocab.entities.len(),
        vocab.relations.len()
    );
    let kg = KnowledgeGraph::new(vocab, loaded.triples, Vec::new(), Vec::new());
    let v = kg.vocab();

    for (r, name) in v.relations.names().iter().enumerate() {
        println!("{name}: {} pairs", kg.pairs(softrule_kge::store::RelationId(r as u32)).len());
    }

    if let (Some(born), Some(france)) = (v.relation("born_in"), v.entity("france")) {
        let city_of = v.relation("city_of").expect("toy graph has city_of");
        for &city in kg.heads(city_of, france) {
            let people: Vec<&str> = kg.heads(born, city).iter().map(|e| v.entities.name(e.0)).collect();
            println!("born in {} (france): {:?}", v.entities.name(city.0), people);
        }
    }

    let probe = kg.train()[0];
    print!("membership of ");
    v.write_triple(&mut std::io::stdout(), probe).expect("stdout");
    println!("  -> {}", kg.contains(&probe));
    Ok(())
}
