//! Saves embeddings with their vocabulary fingerprints and configuration
//! snapshot, reloads them, and shows the vocabulary check rejecting a
//! different graph.
//!
//! cargo run --example checkpoint_roundtrip

use softrule_kge::checkpoint::Checkpoint;
use softrule_kge::model::EmbeddingSet;
use softrule_kge::store::Vocabularies;
use softrule_kge::train::TrainConfig;

fn vocab(names: &[&str]) -> Vocabularies {
    let mut v = Vocabularies::new();
    for n in names {
        v.entities.intern(n);
    }
    v.relations.intern("related_to");
    v
}

fn main() -> softrule_kge::Result<()> {
    let v = vocab(&["a", "b", "c"]);
    let config = TrainConfig { dim: 4, ..Default::default() };
    let emb = EmbeddingSet::init(3, 1, config.dim, config.seed);
    let snapshot = toml::to_string(&config).expect("config serializes");
    let ck = Checkpoint::new(emb, &v, snapshot);

    let path = std::env::temp_dir().join(format!("checkpoint-roundtrip-{}.ckpt", std::process::id()));
    ck.save(&path)?;
    let size = std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
    let back = Checkpoint::load(&path)?;
    let _ = std::fs::remove_file(&path);

    println!("{} bytes, identical after reload: {}", size, back == ck);
    println!("entity fingerprint {:016x}", back.entity_fingerprint);
    back.check_vocab(&v)?;
    println!("vocabulary check against the same names: ok");
    match back.check_vocab(&vocab(&["a", "c", "b"])) {
        Ok(()) => println!("unexpected: reordered vocabulary accepted"),
        Err(e) => println!("reordered vocabulary: {e} (exit code {})", e.exit_code()),
    }
    println!("configuration snapshot:\n{}", back.config);
    Ok(())
}
