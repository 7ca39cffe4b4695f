mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{objective_at, random_soft_instance};
use softrule_kge::rules::{Grounding, Rule};
use softrule_kge::soft_label::{conditional_truth, oracle_solve, predict_soft_labels, projection_objective};

fn refs(g: &[Grounding]) -> Vec<&Grounding> {
    g.iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_matches_numeric_minimizer(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_soft_instance(&mut rng);
        let g = refs(&inst.groundings);
        let closed = predict_soft_labels(&inst.unlabeled, &g, &inst.rules, &inst.emb, inst.c);
        let oracle = oracle_solve(&inst.unlabeled, &g, &inst.rules, &inst.emb, inst.c).unwrap();
        for (a, b) in closed.iter().zip(oracle.iter()) {
            prop_assert_eq!(a.triple, b.triple);
            prop_assert!((a.label - b.label).abs() <= 1e-6, "{} vs {}", a.label, b.label);
        }
    }

    #[test]
    fn labels_stay_in_box_and_never_fall_below_truth(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_soft_instance(&mut rng);
        let labels = predict_soft_labels(&inst.unlabeled, &refs(&inst.groundings), &inst.rules, &inst.emb, inst.c);
        prop_assert_eq!(labels.len(), inst.unlabeled.len());
        for l in labels.iter() {
            prop_assert!((0.0..=1.0).contains(&l.label));
            prop_assert!(l.label >= l.truth);
            prop_assert_eq!(l.truth, inst.emb.truth_value(&l.triple));
        }
        for g in &inst.groundings {
            let pi = conditional_truth(g, &inst.emb, &labels).unwrap();
            prop_assert!((0.0..=1.0).contains(&pi));
        }
    }

    #[test]
    fn labels_grow_with_penalty_and_confidence(seed in any::<u64>(), bump in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_soft_instance(&mut rng);
        let g = refs(&inst.groundings);
        let base = predict_soft_labels(&inst.unlabeled, &g, &inst.rules, &inst.emb, inst.c);
        let more_c = predict_soft_labels(&inst.unlabeled, &g, &inst.rules, &inst.emb, inst.c + bump);
        let surer: Vec<Rule> = inst.rules.iter().map(|r| Rule { confidence: (r.confidence + bump).min(1.0), ..r.clone() }).collect();
        let more_conf = predict_soft_labels(&inst.unlabeled, &g, &surer, &inst.emb, inst.c);
        for ((a, b), c) in base.iter().zip(more_c.iter()).zip(more_conf.iter()) {
            prop_assert!(b.label >= a.label);
            prop_assert!(c.label >= a.label);
        }
    }

    #[test]
    fn closed_form_minimizes_objective(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_soft_instance(&mut rng);
        let g = refs(&inst.groundings);
        let labels = predict_soft_labels(&inst.unlabeled, &g, &inst.rules, &inst.emb, inst.c);
        let s: Vec<f64> = labels.iter().map(|l| l.label).collect();
        let best = objective_at(&inst.unlabeled, &s, &g, &inst.rules, &inst.emb, inst.c);
        let lib = projection_objective(&labels, &g, &inst.rules, &inst.emb, inst.c);
        prop_assert!((best - lib).abs() <= 1e-12);
        for _ in 0..50 {
            let other: Vec<f64> = s.iter().map(|&x| (x + rng.gen_range(-0.3..0.3)).clamp(0.0, 1.0)).collect();
            let value = objective_at(&inst.unlabeled, &other, &g, &inst.rules, &inst.emb, inst.c);
            prop_assert!(value >= best - 1e-12, "{} < {}", value, best);
        }
    }
}

#[test]
fn no_groundings_reproduces_truth() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let inst = random_soft_instance(&mut rng);
    let labels = predict_soft_labels(&inst.unlabeled, &[], &inst.rules, &inst.emb, 3.0);
    for l in labels.iter() {
        assert_eq!(l.label, l.truth);
    }
    let zero_c = predict_soft_labels(&inst.unlabeled, &refs(&inst.groundings), &inst.rules, &inst.emb, 0.0);
    for l in zero_c.iter() {
        assert_eq!(l.label, l.truth);
    }
}
