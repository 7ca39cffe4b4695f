//! Complex-valued entity and relation embeddings with the bilinear score
//! `Re(<e_h, r, conj(e_t)>)` and its sigmoid truth value.
//!
//! Each complex matrix is stored as two parallel row-major real matrices.

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::store::{EntityId, RelationId, Triple};

pub const DEFAULT_INIT_SCALE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    pub(crate) dim: usize,
    pub(crate) n_entities: usize,
    pub(crate) n_relations: usize,
    pub(crate) entity_re: Vec<f64>,
    pub(crate) entity_im: Vec<f64>,
    pub(crate) relation_re: Vec<f64>,
    pub(crate) relation_im: Vec<f64>,
}

/// Borrowed view of one complex row.
#[derive(Debug, Clone, Copy)]
pub struct Row<'a> {
    pub re: &'a [f64],
    pub im: &'a [f64],
}

/// Largest double below 1.
const MAX_TRUTH: f64 = 1.0 - f64::EPSILON / 2.0;

/// Logistic function, kept inside the open interval `(0, 1)`.
pub fn sigmoid(x: f64) -> f64 {
    let v = if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    };
    v.clamp(f64::MIN_POSITIVE, MAX_TRUTH)
}

impl EmbeddingSet {
    pub fn zeros(n_entities: usize, n_relations: usize, dim: usize) -> Self {
        EmbeddingSet {
            dim,
            n_entities,
            n_relations,
            entity_re: vec![0.0; n_entities * dim],
            entity_im: vec![0.0; n_entities * dim],
            relation_re: vec![0.0; n_relations * dim],
            relation_im: vec![0.0; n_relations * dim],
        }
    }

    /// Uniform `[-0.1, 0.1]` initialization, deterministic in `seed`.
    pub fn init(n_entities: usize, n_relations: usize, dim: usize, seed: u64) -> Self {
        Self::init_with_scale(n_entities, n_relations, dim, seed, DEFAULT_INIT_SCALE)
    }

    pub fn init_with_scale(n_entities: usize, n_relations: usize, dim: usize, seed: u64, scale: f64) -> Self {
        assert!(n_entities > 0 && n_relations > 0 && dim > 0, "dimensions must be positive");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Uniform::new_inclusive(-scale, scale);
        let mut fill = |n: usize| -> Vec<f64> { (0..n * dim).map(|_| dist.sample(&mut rng)).collect() };
        EmbeddingSet {
            dim,
            n_entities,
            n_relations,
            entity_re: fill(n_entities),
            entity_im: fill(n_entities),
            relation_re: fill(n_relations),
            relation_im: fill(n_relations),
        }
    }

    /// Builds a set from explicit matrices. Panics on inconsistent shapes.
    pub fn from_parts(
        dim: usize,
        entity_re: Vec<f64>,
        entity_im: Vec<f64>,
        relation_re: Vec<f64>,
        relation_im: Vec<f64>,
    ) -> Self {
        assert!(dim > 0);
        assert_eq!(entity_re.len(), entity_im.len());
        assert_eq!(relation_re.len(), relation_im.len());
        assert_eq!(entity_re.len() % dim, 0);
        assert_eq!(relation_re.len() % dim, 0);
        EmbeddingSet {
            dim,
            n_entities: entity_re.len() / dim,
            n_relations: relation_re.len() / dim,
            entity_re,
            entity_im,
            relation_re,
            relation_im,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_entities(&self) -> usize {
        self.n_entities
    }

    pub fn num_relations(&self) -> usize {
        self.n_relations
    }

    pub fn entity(&self, e: EntityId) -> Row<'_> {
        let r = e.index() * self.dim..(e.index() + 1) * self.dim;
        Row {
            re: &self.entity_re[r.clone()],
            im: &self.entity_im[r],
        }
    }

    pub fn relation(&self, r: RelationId) -> Row<'_> {
        let s = r.index() * self.dim..(r.index() + 1) * self.dim;
        Row {
            re: &self.relation_re[s.clone()],
            im: &self.relation_im[s],
        }
    }

    pub fn entity_mut(&mut self, e: EntityId) -> (&mut [f64], &mut [f64]) {
        let r = e.index() * self.dim..(e.index() + 1) * self.dim;
        (&mut self.entity_re[r.clone()], &mut self.entity_im[r])
    }

    pub fn relation_mut(&mut self, r: RelationId) -> (&mut [f64], &mut [f64]) {
        let s = r.index() * self.dim..(r.index() + 1) * self.dim;
        (&mut self.relation_re[s.clone()], &mut self.relation_im[s])
    }

    /// The four matrices in storage order: entity re/im, relation re/im.
    pub fn matrices(&self) -> [&[f64]; 4] {
        [&self.entity_re, &self.entity_im, &self.relation_re, &self.relation_im]
    }

    pub fn is_finite(&self) -> bool {
        self.matrices().iter().all(|m| m.iter().all(|v| v.is_finite()))
    }

    pub fn score(&self, t: &Triple) -> f64 {
        let h = self.entity(t.head);
        let r = self.relation(t.relation);
        let o = self.entity(t.tail);
        let mut acc = 0.0;
        for m in 0..self.dim {
            acc += h.re[m] * r.re[m] * o.re[m]
                + h.re[m] * r.im[m] * o.im[m]
                + h.im[m] * r.re[m] * o.im[m]
                - h.im[m] * r.im[m] * o.re[m];
        }
        acc
    }

    pub fn truth_value(&self, t: &Triple) -> f64 {
        sigmoid(self.score(t))
    }

    /// Scores `(i, relation, tail)` for every entity `i`.
    pub fn score_all_heads(&self, relation: RelationId, tail: EntityId) -> Vec<f64> {
        let r = self.relation(relation);
        let o = self.entity(tail);
        // v = r * conj(o); score(i) = Re(<e_i, v>)
        let v_re: Vec<f64> = (0..self.dim).map(|m| r.re[m] * o.re[m] + r.im[m] * o.im[m]).collect();
        let v_im: Vec<f64> = (0..self.dim).map(|m| r.im[m] * o.re[m] - r.re[m] * o.im[m]).collect();
        (0..self.n_entities)
            .map(|i| {
                let e = self.entity(EntityId(i as u32));
                (0..self.dim).map(|m| e.re[m] * v_re[m] - e.im[m] * v_im[m]).sum()
            })
            .collect()
    }

    /// Scores `(head, relation, j)` for every entity `j`.
    pub fn score_all_tails(&self, head: EntityId, relation: RelationId) -> Vec<f64> {
        let h = self.entity(head);
        let r = self.relation(relation);
        // w = h * r; score(j) = Re(<w, conj(e_j)>)
        let w_re: Vec<f64> = (0..self.dim).map(|m| h.re[m] * r.re[m] - h.im[m] * r.im[m]).collect();
        let w_im: Vec<f64> = (0..self.dim).map(|m| h.re[m] * r.im[m] + h.im[m] * r.re[m]).collect();
        (0..self.n_entities)
            .map(|j| {
                let e = self.entity(EntityId(j as u32));
                (0..self.dim).map(|m| w_re[m] * e.re[m] + w_im[m] * e.im[m]).sum()
            })
            .collect()
    }
}
