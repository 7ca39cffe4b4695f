//! Random instance builders and brute-force oracles shared by the
//! integration and acceptance tests. Oracles are written independently of the
//! library's indexed or vectorized paths.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use softrule_kge::eval::{Slot, TieMode};
use softrule_kge::model::EmbeddingSet;
use softrule_kge::rules::{Atom, Grounding, Rule, Var};
use softrule_kge::store::{EntityId, KnowledgeGraph, RelationId, Triple, Vocabularies};
use softrule_kge::train::{rectification_loss, LabeledExample, Regularization, SparseGradient};

pub fn t(h: u32, r: u32, o: u32) -> Triple {
    Triple::new(EntityId(h), RelationId(r), EntityId(o))
}

pub fn vocab(n_entities: usize, n_relations: usize) -> Vocabularies {
    let mut v = Vocabularies::new();
    for i in 0..n_entities {
        v.entities.intern(&format!("e{i}"));
    }
    for i in 0..n_relations {
        v.relations.intern(&format!("r{i}"));
    }
    v
}

pub fn random_triples<R: Rng>(rng: &mut R, n_entities: usize, n_relations: usize, count: usize) -> Vec<Triple> {
    let mut seen = HashSet::new();
    let max = n_entities * n_entities * n_relations;
    let count = count.min(max);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = t(
            rng.gen_range(0..n_entities as u32),
            rng.gen_range(0..n_relations as u32),
            rng.gen_range(0..n_entities as u32),
        );
        if seen.insert(x) {
            out.push(x);
        }
    }
    out
}

/// Graph whose train / valid / test splits are disjoint random triples.
pub fn random_kg<R: Rng>(rng: &mut R, n_entities: usize, n_relations: usize, n_train: usize, n_test: usize) -> KnowledgeGraph {
    let max = n_entities * n_entities * n_relations;
    let n_test = n_test.min(max / 4);
    let n_train = n_train.min(max - 2 * n_test);
    let mut all = random_triples(rng, n_entities, n_relations, n_train + 2 * n_test);
    all.shuffle(rng);
    let test = all.split_off(n_train + n_test);
    let valid = all.split_off(n_train);
    KnowledgeGraph::new(vocab(n_entities, n_relations), all, valid, test)
}

/// A safe rule with one or two premise atoms (a path through `z` when two).
pub fn random_rule<R: Rng>(rng: &mut R, n_relations: usize) -> Rule {
    let rel = |rng: &mut R| RelationId(rng.gen_range(0..n_relations as u32));
    let atom = |relation, a, b| Atom {
        relation,
        arg1: a,
        arg2: b,
    };
    let flip = |rng: &mut R, a: Var, b: Var| if rng.gen_bool(0.5) { (a, b) } else { (b, a) };
    let premise = if rng.gen_bool(0.5) {
        let (a, b) = flip(rng, Var::X, Var::Y);
        vec![atom(rel(rng), a, b)]
    } else {
        let (a, b) = flip(rng, Var::X, Var::Z);
        let (c, d) = flip(rng, Var::Z, Var::Y);
        vec![atom(rel(rng), a, b), atom(rel(rng), c, d)]
    };
    let (a, b) = flip(rng, Var::X, Var::Y);
    Rule {
        premise,
        conclusion: atom(rel(rng), a, b),
        confidence: rng.gen_range(0.0..=1.0),
    }
}

fn instantiate(a: &Atom, x: [u32; 3]) -> Triple {
    let v = |var: Var| match var {
        Var::X => x[0],
        Var::Y => x[1],
        Var::Z => x[2],
    };
    t(v(a.arg1), a.relation.0, v(a.arg2))
}

fn uses_z(rule: &Rule) -> bool {
    rule.premise
        .iter()
        .chain(std::iter::once(&rule.conclusion))
        .any(|a| a.arg1 == Var::Z || a.arg2 == Var::Z)
}

/// Every assignment of entities to variables, kept when all premises are in
/// `observed` and the conclusion is not.
pub fn brute_force_groundings(rules: &[Rule], n_entities: usize, observed: &HashSet<Triple>) -> BTreeSet<(usize, Vec<Triple>, Triple)> {
    let n = n_entities as u32;
    let mut out = BTreeSet::new();
    for (i, rule) in rules.iter().enumerate() {
        let zs = if uses_z(rule) { n } else { 1 };
        for x in 0..n {
            for y in 0..n {
                for z in 0..zs {
                    let premises: Vec<Triple> = rule.premise.iter().map(|a| instantiate(a, [x, y, z])).collect();
                    let conclusion = instantiate(&rule.conclusion, [x, y, z]);
                    if premises.iter().all(|p| observed.contains(p)) && !observed.contains(&conclusion) {
                        out.insert((i, premises, conclusion));
                    }
                }
            }
        }
    }
    out
}

pub fn grounding_key(g: &Grounding) -> (usize, Vec<Triple>, Triple) {
    (g.rule, g.premises.clone(), g.conclusion)
}

/// Score through complex arithmetic: `Re(sum_k h_k r_k conj(t_k))`.
pub fn complex_score(emb: &EmbeddingSet, x: &Triple) -> f64 {
    let (h, r, o) = (emb.entity(x.head), emb.relation(x.relation), emb.entity(x.tail));
    (0..emb.dim())
        .map(|k| Complex64::new(h.re[k], h.im[k]) * Complex64::new(r.re[k], r.im[k]) * Complex64::new(o.re[k], o.im[k]).conj())
        .sum::<Complex64>()
        .re
}

/// Materializes every corruption, drops filtered ones (except the test
/// triple), sorts by score and reads off the rank of the correct entity.
pub fn brute_force_rank(emb: &EmbeddingSet, test: &Triple, slot: Slot, kg: &KnowledgeGraph, tie: TieMode, filtered: bool) -> usize {
    let target = match slot {
        Slot::Head => test.head,
        Slot::Tail => test.tail,
    };
    let mut candidates: Vec<(f64, bool)> = (0..kg.num_entities() as u32)
        .map(EntityId)
        .filter_map(|e| {
            let c = match slot {
                Slot::Head => Triple { head: e, ..*test },
                Slot::Tail => Triple { tail: e, ..*test },
            };
            let keep = e == target || !filtered || !kg.in_filter(&c);
            keep.then(|| (complex_score(emb, &c), e == target))
        })
        .collect();
    candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let s = candidates.iter().find(|c| c.1).unwrap().0;
    let above = candidates.iter().filter(|c| c.0 > s).count();
    let tied = candidates.iter().filter(|c| c.0 == s && !c.1).count();
    let extra = match tie {
        TieMode::Optimistic => 0,
        TieMode::Pessimistic => tied,
        TieMode::Mid => tied.div_ceil(2),
    };
    above + extra + 1
}

/// Embeddings with small integer entries, so that exact score ties occur.
pub fn integer_embeddings<R: Rng>(rng: &mut R, n_entities: usize, n_relations: usize, dim: usize) -> EmbeddingSet {
    let mut v = |n: usize| -> Vec<f64> { (0..n * dim).map(|_| rng.gen_range(-1i32..=1) as f64).collect() };
    let (a, b, c, d) = (v(n_entities), v(n_entities), v(n_relations), v(n_relations));
    EmbeddingSet::from_parts(dim, a, b, c, d)
}

/// Which parameter a flat index addresses.
#[derive(Debug, Clone, Copy)]
pub enum Param {
    Entity(EntityId, bool, usize),
    Relation(RelationId, bool, usize),
}

pub fn all_params(emb: &EmbeddingSet) -> Vec<Param> {
    let d = emb.dim();
    let mut out = Vec::new();
    for e in 0..emb.num_entities() as u32 {
        for im in [false, true] {
            out.extend((0..d).map(|k| Param::Entity(EntityId(e), im, k)));
        }
    }
    for r in 0..emb.num_relations() as u32 {
        for im in [false, true] {
            out.extend((0..d).map(|k| Param::Relation(RelationId(r), im, k)));
        }
    }
    out
}

pub fn param_mut(emb: &mut EmbeddingSet, p: Param) -> &mut f64 {
    match p {
        Param::Entity(e, im, k) => {
            let (re, imv) = emb.entity_mut(e);
            if im {
                &mut imv[k]
            } else {
                &mut re[k]
            }
        }
        Param::Relation(r, im, k) => {
            let (re, imv) = emb.relation_mut(r);
            if im {
                &mut imv[k]
            } else {
                &mut re[k]
            }
        }
    }
}

pub fn grad_at(g: &SparseGradient, p: Param) -> f64 {
    let pick = |row: Option<&(Vec<f64>, Vec<f64>)>, im: bool, k: usize| {
        row.map_or(0.0, |(re, imv)| if im { imv[k] } else { re[k] })
    };
    match p {
        Param::Entity(e, im, k) => pick(g.entities.get(&e), im, k),
        Param::Relation(r, im, k) => pick(g.relations.get(&r), im, k),
    }
}

/// Central finite differences of the rectification loss at every parameter.
pub fn numeric_gradient(
    labeled: &[LabeledExample],
    soft: &[(Triple, f64)],
    emb: &EmbeddingSet,
    l2: f64,
    mode: Regularization,
    h: f64,
) -> Vec<(Param, f64)> {
    let mut work = emb.clone();
    all_params(emb)
        .into_iter()
        .map(|p| {
            let x = *param_mut(&mut work, p);
            *param_mut(&mut work, p) = x + h;
            let up = rectification_loss(labeled, soft, &work, l2, mode);
            *param_mut(&mut work, p) = x - h;
            let down = rectification_loss(labeled, soft, &work, l2, mode);
            *param_mut(&mut work, p) = x;
            (p, (up - down) / (2.0 * h))
        })
        .collect()
}

/// `||analytic - numeric|| / max(||analytic||, ||numeric||)` over all
/// parameters.
pub fn gradient_relative_error(analytic: &SparseGradient, numeric: &[(Param, f64)]) -> f64 {
    let (mut diff, mut na, mut nn) = (0.0, 0.0, 0.0);
    for &(p, n) in numeric {
        let a = grad_at(analytic, p);
        diff += (a - n) * (a - n);
        na += a * a;
        nn += n * n;
    }
    let scale = na.sqrt().max(nn.sqrt());
    if scale == 0.0 {
        0.0
    } else {
        diff.sqrt() / scale
    }
}

/// One labelled batch (positives and corruptions) and soft targets on a
/// small random graph.
pub fn random_batch<R: Rng>(rng: &mut R, n_entities: usize, n_relations: usize) -> (Vec<LabeledExample>, Vec<(Triple, f64)>) {
    let triples = random_triples(rng, n_entities, n_relations, 9);
    let labeled = triples[..6]
        .iter()
        .enumerate()
        .map(|(i, x)| if i % 2 == 0 { LabeledExample::positive(*x) } else { LabeledExample::negative(*x) })
        .collect();
    let soft = triples[6..].iter().map(|x| (*x, rng.gen_range(0.0..=1.0))).collect();
    (labeled, soft)
}

/// The projection objective written out directly, at arbitrary labels.
pub fn objective_at(
    unlabeled: &[Triple],
    labels: &[f64],
    groundings: &[&Grounding],
    rules: &[Rule],
    emb: &EmbeddingSet,
    c: f64,
) -> f64 {
    let label_of = |x: &Triple| labels[unlabeled.iter().position(|u| u == x).unwrap()];
    let fit: f64 = unlabeled
        .iter()
        .zip(labels)
        .map(|(u, s)| 0.5 * (s - emb.truth_value(u)).powi(2))
        .sum();
    let slack: f64 = groundings
        .iter()
        .map(|g| {
            let premise: f64 = g.premises.iter().map(|p| emb.truth_value(p)).product();
            let pi = premise * label_of(&g.conclusion) - premise + 1.0;
            (rules[g.rule].confidence * (1.0 - pi)).max(0.0)
        })
        .sum();
    fit + c * slack
}

/// A random soft-label instance: up to 8 unlabeled conclusions, up to 12
/// groundings with one or two premises each (conclusions may be shared),
/// `C` log-uniform in `[0.001, 1]` and confidences in `[0, 1]`.
pub struct SoftInstance {
    pub emb: EmbeddingSet,
    pub rules: Vec<Rule>,
    pub groundings: Vec<Grounding>,
    pub unlabeled: Vec<Triple>,
    pub c: f64,
}

pub fn random_soft_instance<R: Rng>(rng: &mut R) -> SoftInstance {
    let (n_e, n_r) = (8, 3);
    let dim = rng.gen_range(1..=4);
    let emb = EmbeddingSet::init_with_scale(n_e, n_r, dim, rng.gen(), rng.gen_range(0.1..1.5));
    let n_rules = rng.gen_range(1..=4);
    let rules: Vec<Rule> = (0..n_rules).map(|_| random_rule(rng, n_r)).collect();
    let all = random_triples(rng, n_e, n_r, 40);
    let n_u = rng.gen_range(1..=8);
    let unlabeled = all[..n_u].to_vec();
    let observed = &all[n_u..];
    let groundings = (0..rng.gen_range(0..=12))
        .map(|_| {
            let rule = rng.gen_range(0..n_rules);
            Grounding {
                rule,
                premises: (0..rules[rule].premise.len()).map(|_| *observed.choose(rng).unwrap()).collect(),
                conclusion: *unlabeled.choose(rng).unwrap(),
            }
        })
        .collect();
    SoftInstance {
        emb,
        rules,
        groundings,
        unlabeled,
        c: 10f64.powf(rng.gen_range(-3.0..=0.0)),
    }
}
