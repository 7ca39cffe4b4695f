mod common;

use std::io::Cursor;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{random_triples, t, vocab};
use softrule_kge::store::{EntityId, KnowledgeGraph, RelationId, Triple, VocabMode, Vocabularies};
use softrule_kge::Error;

fn graph(triples: Vec<Triple>, n_e: usize, n_r: usize) -> KnowledgeGraph {
    KnowledgeGraph::new(vocab(n_e, n_r), triples, Vec::new(), Vec::new())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn membership_matches_linear_scan(seed in any::<u64>(), n in 1usize..2000, n_e in 2usize..60, n_r in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let triples = random_triples(&mut rng, n_e, n_r, n);
        let probes = random_triples(&mut rng, n_e, n_r, 200);
        let kg = graph(triples.clone(), n_e, n_r);
        for p in probes.iter().chain(&triples) {
            prop_assert_eq!(kg.contains(p), triples.iter().any(|x| x == p));
        }
        // adjacency lists agree with scans
        for p in &probes {
            let mut tails: Vec<EntityId> = triples.iter().filter(|x| x.head == p.head && x.relation == p.relation).map(|x| x.tail).collect();
            let mut got = kg.tails(p.relation, p.head).to_vec();
            tails.sort(); got.sort();
            prop_assert_eq!(got, tails);
            let mut heads: Vec<EntityId> = triples.iter().filter(|x| x.tail == p.tail && x.relation == p.relation).map(|x| x.head).collect();
            let mut got = kg.heads(p.relation, p.tail).to_vec();
            heads.sort(); got.sort();
            prop_assert_eq!(got, heads);
        }
        for r in 0..n_r as u32 {
            let count = triples.iter().filter(|x| x.relation == RelationId(r)).count();
            prop_assert_eq!(kg.pairs(RelationId(r)).len(), count);
        }
    }

    #[test]
    fn serialization_round_trips(seed in any::<u64>(), n in 1usize..500) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let triples = random_triples(&mut rng, 30, 4, n);
        let v = vocab(30, 4);
        let mut buf = Vec::new();
        v.write_triples(&mut buf, &triples).unwrap();
        let mut fresh = Vocabularies::new();
        let loaded = fresh.read_triples(Cursor::new(&buf), "mem", VocabMode::Extend).unwrap();
        prop_assert_eq!(loaded.duplicates, 0);
        // names round-trip even though ids may be renumbered
        let names = |v: &Vocabularies, x: &Triple| (
            v.entities.name(x.head.0).to_owned(),
            v.relations.name(x.relation.0).to_owned(),
            v.entities.name(x.tail.0).to_owned(),
        );
        let a: Vec<_> = triples.iter().map(|x| names(&v, x)).collect();
        let b: Vec<_> = loaded.triples.iter().map(|x| names(&fresh, x)).collect();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn duplicates_and_comments_are_skipped() {
    let text = "# header\na\tr\tb\n\na\tr\tb\nb\tr\tc\n";
    let mut v = Vocabularies::new();
    let loaded = v.read_triples(Cursor::new(text), "mem", VocabMode::Extend).unwrap();
    assert_eq!(loaded.triples.len(), 2);
    assert_eq!(loaded.duplicates, 1);
    assert_eq!(v.entities.len(), 3);
}

#[test]
fn malformed_lines_report_position() {
    let mut v = Vocabularies::new();
    let err = v.read_triples(Cursor::new("a\tr\tb\na\tr\n"), "f.tsv", VocabMode::Extend).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn frozen_vocabulary_rejects_new_names() {
    let mut v = vocab(3, 1);
    let err = v.read_triples(Cursor::new("e0\tr0\tunseen\n"), "test.tsv", VocabMode::Frozen).unwrap_err();
    assert!(matches!(err, Error::UnknownSymbol { .. }), "{err}");
    let ok = v.read_triples(Cursor::new("e0\tr0\te2\n"), "test.tsv", VocabMode::Frozen).unwrap();
    assert_eq!(ok.triples, vec![t(0, 0, 2)]);
}

#[test]
fn filter_covers_every_split() {
    let kg = KnowledgeGraph::new(vocab(4, 1), vec![t(0, 0, 1)], vec![t(1, 0, 2)], vec![t(2, 0, 3)]);
    assert!(kg.contains(&t(0, 0, 1)));
    assert!(!kg.contains(&t(1, 0, 2)));
    for x in [t(0, 0, 1), t(1, 0, 2), t(2, 0, 3)] {
        assert!(kg.in_filter(&x));
    }
    assert!(!kg.in_filter(&t(3, 0, 0)));
}

#[test]
fn fingerprint_depends_on_names_and_order() {
    let a = vocab(3, 1);
    let b = vocab(3, 1);
    assert_eq!(a.entities.fingerprint(), b.entities.fingerprint());
    let mut c = Vocabularies::new();
    for n in ["e1", "e0", "e2"] {
        c.entities.intern(n);
    }
    assert_ne!(a.entities.fingerprint(), c.entities.fingerprint());
}
