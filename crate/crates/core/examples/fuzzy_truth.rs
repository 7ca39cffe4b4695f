//! Product t-norm connectives and the truth value of grounded rules.
//!
//! cargo run --example fuzzy_truth

use softrule_kge::fuzzy::{grounding_truth, implication, t_and, t_not, t_or};
use softrule_kge::rules::Grounding;
use softrule_kge::store::{EntityId, RelationId, Triple};

fn main() {
    let (a, b) = (0.9, 0.6);
    println!("a = {a}, b = {b}");
    println!("a & b  = {:.4}", t_and(a, b));
    println!("a | b  = {:.4}", t_or(a, b));
    println!("!a     = {:.4}", t_not(a));
    println!("a => b = {:.4}", implication(a, b));
    println!("!(a & b) vs !a | !b: {:.4} {:.4}", t_not(t_and(a, b)), t_or(t_not(a), t_not(b)));

    let t = |h, r, o| Triple::new(EntityId(h), RelationId(r), EntityId(o));
    let g = Grounding {
        rule: 0,
        premises: vec![t(0, 0, 1), t(1, 1, 2)],
        conclusion: t(0, 2, 2),
    };
    for conclusion in [0.0, 0.3, 0.7, 1.0] {
        let truth = |x: &Triple| match x.relation.0 {
            0 => 0.9,
            1 => 0.8,
            _ => conclusion,
        };
        println!(
            "premises 0.9 & 0.8, conclusion {conclusion:.1} -> rule truth {:.4}",
            grounding_truth(&g, truth)
        );
    }
}
