//! Filtered link-prediction ranking: per-query ranks under each tie
//! convention, the top tail candidates, and the aggregate metrics.
//!
//! cargo run --example rank_queries

use softrule_kge::eval::{evaluate, rank_entity, rank_entity_raw, Slot, TieMode};
use softrule_kge::model::EmbeddingSet;
use softrule_kge::store::{EntityId, KnowledgeGraph, RelationId, Triple, Vocabularies};

fn main() -> softrule_kge::Result<()> {
    let mut vocab = Vocabularies::new();
    for i in 0..8 {
        vocab.entities.intern(&format!("e{i}"));
    }
    vocab.relations.intern("likes");
    let t = |h, o| Triple::new(EntityId(h), RelationId(0), EntityId(o));
    let train = vec![t(0, 1), t(0, 2), t(3, 4)];
    let test = vec![t(0, 3), t(3, 5)];
    let kg = KnowledgeGraph::new(vocab, train, Vec::new(), test);

    // coarse embeddings make exact score ties likely
    let dim = 2;
    let rows = |vals: &[f64]| vals.to_vec();
    let emb = EmbeddingSet::from_parts(
        dim,
        rows(&[1., 0., 1., 1., 1., 1., 1., 0., 0., 1., 1., 0., 0., 0., 1., 1.]),
        rows(&[0.; 16]),
        rows(&[1., 1.]),
        rows(&[0., 0.]),
    );

    for x in kg.test() {
        for slot in [Slot::Head, Slot::Tail] {
            let ranks: Vec<String> = [TieMode::Optimistic, TieMode::Mid, TieMode::Pessimistic]
                .iter()
                .map(|&tie| format!("{tie:?} {} (raw {})", rank_entity(&emb, x, slot, &kg, tie), rank_entity_raw(&emb, x, slot, tie)))
                .collect();
            println!("e{} likes e{} {slot:?}: {}", x.head.0, x.tail.0, ranks.join(", "));
        }
    }

    let head = EntityId(0);
    let mut scored: Vec<(usize, f64)> = emb.score_all_tails(head, RelationId(0)).into_iter().enumerate().collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("top tails for (e0, likes, ?): {:?}", &scored[..4]);

    let report = evaluate(&emb, kg.test(), &kg, TieMode::Mid)?;
    print!("{}", report.to_table());
    Ok(())
}
