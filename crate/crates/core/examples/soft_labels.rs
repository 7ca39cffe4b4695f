//! Soft labels for rule conclusions: the closed form next to the numeric
//! minimizer of the same slack-penalized projection, for several penalties.
//!
//! cargo run --example soft_labels

use softrule_kge::model::EmbeddingSet;
use softrule_kge::rules::{Atom, Grounding, Rule, Var};
use softrule_kge::soft_label::{oracle_solve, predict_soft_labels, projection_objective};
use softrule_kge::store::{EntityId, RelationId, Triple};

fn main() {
    let t = |h, r, o| Triple::new(EntityId(h), RelationId(r), EntityId(o));
    let atom = |r, a, b| Atom {
        relation: RelationId(r),
        arg1: a,
        arg2: b,
    };
    let rules = vec![
        Rule {
            premise: vec![atom(0, Var::X, Var::Y)],
            conclusion: atom(1, Var::X, Var::Y),
            confidence: 0.9,
        },
        Rule {
            premise: vec![atom(0, Var::X, Var::Z), atom(2, Var::Z, Var::Y)],
            conclusion: atom(1, Var::X, Var::Y),
            confidence: 0.6,
        },
    ];
    // two groundings share the first conclusion
    let groundings = [
        Grounding { rule: 0, premises: vec![t(0, 0, 1)], conclusion: t(0, 1, 1) },
        Grounding { rule: 1, premises: vec![t(0, 0, 2), t(2, 2, 1)], conclusion: t(0, 1, 1) },
        Grounding { rule: 0, premises: vec![t(3, 0, 4)], conclusion: t(3, 1, 4) },
    ];
    let unlabeled = vec![t(0, 1, 1), t(3, 1, 4)];
    let refs: Vec<&Grounding> = groundings.iter().collect();
    let emb = EmbeddingSet::init_with_scale(5, 3, 4, 7, 0.6);

    println!("{:>6} {:>12} {:>10} {:>10} {:>10}", "C", "triple", "truth", "closed", "numeric");
    for c in [0.0, 0.01, 0.1, 0.5, 1.0] {
        let closed = predict_soft_labels(&unlabeled, &refs, &rules, &emb, c);
        let numeric = oracle_solve(&unlabeled, &refs, &rules, &emb, c).expect("small instance converges");
        for (a, b) in closed.iter().zip(numeric.iter()) {
            let x = a.triple;
            println!(
                "{c:>6} {:>12} {:>10.6} {:>10.6} {:>10.6}",
                format!("({},{},{})", x.head.0, x.relation.0, x.tail.0),
                a.truth,
                a.label,
                b.label
            );
        }
        println!("       objective at closed form {:.6}", projection_objective(&closed, &refs, &rules, &emb, c));
    }
}
