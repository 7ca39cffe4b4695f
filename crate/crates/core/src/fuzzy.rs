//! Product t-norm connectives for composing triple truth values into the
//! truth value of a grounded rule.

use crate::rules::Grounding;
use crate::store::Triple;

/// A truth-value algebra. Only [`Product`] is provided.
pub trait TNorm {
    fn and(&self, a: f64, b: f64) -> f64;
    fn or(&self, a: f64, b: f64) -> f64;
    fn not(&self, a: f64) -> f64;

    /// `a => b` read as `!a | b`.
    fn implies(&self, a: f64, b: f64) -> f64 {
        self.or(self.not(a), b)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Product;

impl TNorm for Product {
    fn and(&self, a: f64, b: f64) -> f64 {
        a * b
    }

    fn or(&self, a: f64, b: f64) -> f64 {
        a + b - a * b
    }

    fn not(&self, a: f64) -> f64 {
        1.0 - a
    }

    fn implies(&self, a: f64, b: f64) -> f64 {
        a * b - a + 1.0
    }
}

pub fn t_and(a: f64, b: f64) -> f64 {
    Product.and(a, b)
}

pub fn t_or(a: f64, b: f64) -> f64 {
    Product.or(a, b)
}

pub fn t_not(a: f64) -> f64 {
    Product.not(a)
}

pub fn implication(premise: f64, conclusion: f64) -> f64 {
    Product.implies(premise, conclusion)
}

/// Conjunction of the premise truth values of a grounding.
pub fn premise_truth(g: &Grounding, mut triple_truth: impl FnMut(&Triple) -> f64) -> f64 {
    g.premises
        .iter()
        .fold(1.0, |acc, t| t_and(acc, triple_truth(t)))
}

/// Truth value of `premise_1 & ... => conclusion` for a grounding.
pub fn grounding_truth(g: &Grounding, mut triple_truth: impl FnMut(&Triple) -> f64) -> f64 {
    let premise = premise_truth(g, &mut triple_truth);
    implication(premise, triple_truth(&g.conclusion))
}
