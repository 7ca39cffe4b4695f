//! Filtered link-prediction ranking and the MRR / MED / HITS@N aggregates.
//!
//! For each test triple the head and the tail are replaced by every entity.
//! Candidates that are known triples in any split (other than the test triple
//! itself) are discarded before the correct entity is ranked.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::EmbeddingSet;
use crate::store::{EntityId, KnowledgeGraph, Triple, Vocabularies};

pub const HITS_AT: [usize; 4] = [1, 3, 5, 10];

/// How candidates scoring exactly as high as the correct entity count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieMode {
    /// Half of the ties rank above, rounded half up.
    #[default]
    Mid,
    /// No tie ranks above.
    Optimistic,
    /// Every tie ranks above.
    Pessimistic,
}

impl FromStr for TieMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mid" => Ok(TieMode::Mid),
            "optimistic" => Ok(TieMode::Optimistic),
            "pessimistic" => Ok(TieMode::Pessimistic),
            other => Err(Error::Config(format!("unknown tie mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    Head,
    Tail,
}

impl Slot {
    fn replace(self, t: &Triple, e: EntityId) -> Triple {
        match self {
            Slot::Head => Triple { head: e, ..*t },
            Slot::Tail => Triple { tail: e, ..*t },
        }
    }

    fn target(self, t: &Triple) -> EntityId {
        match self {
            Slot::Head => t.head,
            Slot::Tail => t.tail,
        }
    }
}

fn rank_in(scores: &[f64], target: usize, tie: TieMode, mut skip: impl FnMut(usize) -> bool) -> usize {
    let s = scores[target];
    let (mut greater, mut equal) = (0usize, 0usize);
    for (i, &v) in scores.iter().enumerate() {
        if i == target || skip(i) {
            continue;
        }
        if v > s {
            greater += 1;
        } else if v == s {
            equal += 1;
        }
    }
    1 + greater
        + match tie {
            TieMode::Optimistic => 0,
            TieMode::Pessimistic => equal,
            TieMode::Mid => equal.div_ceil(2),
        }
}

fn slot_scores(emb: &EmbeddingSet, t: &Triple, slot: Slot) -> Vec<f64> {
    match slot {
        Slot::Head => emb.score_all_heads(t.relation, t.tail),
        Slot::Tail => emb.score_all_tails(t.head, t.relation),
    }
}

/// Filtered rank of the correct entity in `slot`.
pub fn rank_entity(emb: &EmbeddingSet, test: &Triple, slot: Slot, kg: &KnowledgeGraph, tie: TieMode) -> usize {
    let scores = slot_scores(emb, test, slot);
    rank_in(&scores, slot.target(test).index(), tie, |i| {
        kg.in_filter(&slot.replace(test, EntityId(i as u32)))
    })
}

/// Rank among all candidates, without filtering.
pub fn rank_entity_raw(emb: &EmbeddingSet, test: &Triple, slot: Slot, tie: TieMode) -> usize {
    let scores = slot_scores(emb, test, slot);
    rank_in(&scores, slot.target(test).index(), tie, |_| false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankRecord {
    pub triple: Triple,
    pub head_rank: usize,
    pub tail_rank: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mrr: f64,
    pub med: f64,
    /// HITS@N for every N in [`HITS_AT`].
    pub hits: BTreeMap<usize, f64>,
    /// Number of ranks aggregated (two per test triple).
    pub count: usize,
    pub records: Vec<RankRecord>,
}

impl EvalReport {
    /// Aggregates a flat list of ranks. Panics on an empty list.
    pub fn from_ranks(ranks: &[usize]) -> Self {
        assert!(!ranks.is_empty(), "no ranks to aggregate");
        let n = ranks.len() as f64;
        let mrr = ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / n;
        let mut sorted = ranks.to_vec();
        sorted.sort_unstable();
        let mid = sorted.len() / 2;
        let med = if sorted.len() % 2 == 1 {
            sorted[mid] as f64
        } else {
            (sorted[mid - 1] + sorted[mid]) as f64 / 2.0
        };
        let hits = HITS_AT
            .iter()
            .map(|&k| (k, ranks.iter().filter(|&&r| r <= k).count() as f64 / n))
            .collect();
        EvalReport {
            mrr,
            med,
            hits,
            count: ranks.len(),
            records: Vec::new(),
        }
    }

    pub fn hits_at(&self, n: usize) -> f64 {
        self.hits[&n]
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<10} {:>10}", "metric", "value");
        let _ = writeln!(out, "{:<10} {:>10.4}", "MRR", self.mrr);
        let _ = writeln!(out, "{:<10} {:>10.1}", "MED", self.med);
        for (k, v) in &self.hits {
            let _ = writeln!(out, "{:<10} {:>10.4}", format!("HITS@{k}"), v);
        }
        let _ = writeln!(out, "{:<10} {:>10}", "ranks", self.count);
        out
    }

    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "mrr={}", self.mrr);
        let _ = writeln!(out, "med={}", self.med);
        for (k, v) in &self.hits {
            let _ = writeln!(out, "hits@{k}={v}");
        }
        let _ = writeln!(out, "ranks={}", self.count);
        out
    }

    /// TSV `head relation tail head_rank tail_rank`, one line per test triple.
    pub fn write_rank_dump<W: Write>(&self, out: &mut W, vocab: &Vocabularies) -> std::io::Result<()> {
        for r in &self.records {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                vocab.entities.name(r.triple.head.0),
                vocab.relations.name(r.triple.relation.0),
                vocab.entities.name(r.triple.tail.0),
                r.head_rank,
                r.tail_rank
            )?;
        }
        Ok(())
    }
}

/// Ranks every test triple in both slots and aggregates the ranks.
pub fn evaluate(emb: &EmbeddingSet, test: &[Triple], kg: &KnowledgeGraph, tie: TieMode) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::Config("evaluation set is empty".into()));
    }
    let records: Vec<RankRecord> = test
        .par_iter()
        .map(|t| RankRecord {
            triple: *t,
            head_rank: rank_entity(emb, t, Slot::Head, kg, tie),
            tail_rank: rank_entity(emb, t, Slot::Tail, kg, tie),
        })
        .collect();
    let ranks: Vec<usize> = records.iter().flat_map(|r| [r.head_rank, r.tail_rank]).collect();
    let mut report = EvalReport::from_ranks(&ranks);
    report.records = records;
    Ok(report)
}
