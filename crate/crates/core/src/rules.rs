//! Soft Horn rules: parsing, propositionalization against the observed set,
//! and per-batch grounding lookup.
//!
//! Rule file grammar, one rule per line:
//!
//! ```text
//! rel(x,y) [& rel(y,z)] => rel(x,z) <whitespace> confidence
//! ```
//!
//! Variables are `x`, `y` and `z`. Lines starting with `#` are ignored.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::store::{EntityId, KnowledgeGraph, RelationId, Triple, Vocabularies};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    X,
    Y,
    Z,
}

impl Var {
    fn parse(s: &str) -> Option<Var> {
        match s {
            "x" => Some(Var::X),
            "y" => Some(Var::Y),
            "z" => Some(Var::Z),
            _ => None,
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Var::X => "x",
            Var::Y => "y",
            Var::Z => "z",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Atom {
    pub relation: RelationId,
    pub arg1: Var,
    pub arg2: Var,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    /// One or two atoms, read as a conjunction.
    pub premise: Vec<Atom>,
    pub conclusion: Atom,
    /// Confidence level in `[0, 1]`; `1` is a hard rule.
    pub confidence: f64,
}

impl Rule {
    pub fn display<'a>(&'a self, vocab: &'a Vocabularies) -> impl fmt::Display + 'a {
        struct D<'a>(&'a Rule, &'a Vocabularies);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let atom = |f: &mut fmt::Formatter<'_>, a: &Atom| {
                    write!(f, "{}({},{})", self.1.relations.name(a.relation.0), a.arg1, a.arg2)
                };
                for (i, a) in self.0.premise.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    atom(f, a)?;
                }
                f.write_str(" => ")?;
                atom(f, &self.0.conclusion)?;
                write!(f, "\t{}", self.0.confidence)
            }
        }
        D(self, vocab)
    }
}

/// A fully instantiated rule whose premises are observed and whose
/// conclusion is not.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Grounding {
    /// Index of the source rule.
    pub rule: usize,
    pub premises: Vec<Triple>,
    pub conclusion: Triple,
}

pub fn parse_rules(path: impl AsRef<Path>, vocab: &Vocabularies, min_confidence: f64) -> Result<Vec<Rule>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_rules(BufReader::new(file), &path.display().to_string(), vocab, min_confidence)
}

/// Parses rules from a reader, dropping those below `min_confidence`.
pub fn read_rules<R: BufRead>(
    reader: R,
    origin: &str,
    vocab: &Vocabularies,
    min_confidence: f64,
) -> Result<Vec<Rule>> {
    let mut rules = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let rule = parse_rule_line(line, vocab).map_err(|err| match err {
            LineError::Syntax(message) => Error::Parse {
                origin: origin.to_owned(),
                line: lineno,
                message,
            },
            LineError::UnknownRelation(name) => Error::UnknownSymbol {
                origin: origin.to_owned(),
                line: lineno,
                kind: "relation",
                name,
            },
        })?;
        if rule.confidence >= min_confidence {
            rules.push(rule);
        }
    }
    Ok(rules)
}

enum LineError {
    Syntax(String),
    UnknownRelation(String),
}

fn parse_rule_line(line: &str, vocab: &Vocabularies) -> Result<Rule, LineError> {
    let syntax = |m: &str| LineError::Syntax(m.to_owned());

    let split = line
        .rfind(char::is_whitespace)
        .ok_or_else(|| syntax("missing confidence"))?;
    let (clause, confidence) = (line[..split].trim(), line[split..].trim());
    let confidence: f64 = confidence
        .parse()
        .map_err(|_| LineError::Syntax(format!("invalid confidence `{confidence}`")))?;
    if !(0.0..=1.0).contains(&confidence) {
        return Err(LineError::Syntax(format!("confidence {confidence} outside [0,1]")));
    }

    let mut sides = clause.split("=>");
    let (body, head) = match (sides.next(), sides.next(), sides.next()) {
        (Some(b), Some(h), None) => (b, h),
        _ => return Err(syntax("expected exactly one `=>`")),
    };
    let premise = body
        .split('&')
        .map(|a| parse_atom(a, vocab))
        .collect::<Result<Vec<_>, _>>()?;
    if premise.is_empty() || premise.len() > 2 {
        return Err(syntax("premise must have one or two atoms"));
    }
    let conclusion = parse_atom(head, vocab)?;

    let bound: HashSet<Var> = premise.iter().flat_map(|a| [a.arg1, a.arg2]).collect();
    if !bound.contains(&conclusion.arg1) || !bound.contains(&conclusion.arg2) {
        return Err(syntax("conclusion variable does not occur in the premise"));
    }
    Ok(Rule {
        premise,
        conclusion,
        confidence,
    })
}

fn parse_atom(text: &str, vocab: &Vocabularies) -> Result<Atom, LineError> {
    let text = text.trim();
    let bad = || LineError::Syntax(format!("malformed atom `{text}`"));
    let open = text.find('(').ok_or_else(bad)?;
    let args = text[open + 1..].strip_suffix(')').ok_or_else(bad)?;
    let name = text[..open].trim();
    if name.is_empty() {
        return Err(bad());
    }
    let (a, b) = args.split_once(',').ok_or_else(bad)?;
    let arg1 = Var::parse(a.trim()).ok_or_else(bad)?;
    let arg2 = Var::parse(b.trim()).ok_or_else(bad)?;
    let relation = vocab
        .relation(name)
        .ok_or_else(|| LineError::UnknownRelation(name.to_owned()))?;
    Ok(Atom {
        relation,
        arg1,
        arg2,
    })
}

/// Valid groundings together with their distinct conclusion triples.
#[derive(Debug, Clone, Default)]
pub struct Propositionalized {
    pub groundings: Vec<Grounding>,
    /// Distinct conclusions in first-appearance order.
    pub unlabeled: Vec<Triple>,
}

type Binding = [Option<EntityId>; 3];

/// Instantiates every rule against the observed set, keeping the groundings
/// whose premises are all observed and whose conclusion is not.
pub fn propositionalize(rules: &[Rule], kg: &KnowledgeGraph) -> Propositionalized {
    let per_rule: Vec<Vec<Grounding>> = rules
        .par_iter()
        .enumerate()
        .map(|(index, rule)| ground_rule(index, rule, kg))
        .collect();

    let mut out = Propositionalized::default();
    let mut seen = HashSet::new();
    for g in per_rule.into_iter().flatten() {
        if seen.insert(g.conclusion) {
            out.unlabeled.push(g.conclusion);
        }
        out.groundings.push(g);
    }
    out
}

fn ground_rule(index: usize, rule: &Rule, kg: &KnowledgeGraph) -> Vec<Grounding> {
    let mut found = Vec::new();
    let mut emit = |b: &Binding| {
        let conclusion = instantiate(&rule.conclusion, b);
        if kg.contains(&conclusion) {
            return;
        }
        found.push(Grounding {
            rule: index,
            premises: rule.premise.iter().map(|a| instantiate(a, b)).collect(),
            conclusion,
        });
    };
    match rule.premise.as_slice() {
        [first] => extend(first, &[None; 3], kg, &mut emit),
        [first, second] => extend(first, &[None; 3], kg, &mut |b| extend(second, b, kg, &mut emit)),
        _ => unreachable!("rules have one or two premise atoms"),
    }
    found
}

fn instantiate(atom: &Atom, b: &Binding) -> Triple {
    Triple::new(
        b[atom.arg1.slot()].expect("bound"),
        atom.relation,
        b[atom.arg2.slot()].expect("bound"),
    )
}

/// Calls `f` with every extension of `b` under which `atom` is an observed
/// triple. Joins through the head/tail indices when a side is already bound.
fn extend(atom: &Atom, b: &Binding, kg: &KnowledgeGraph, f: &mut dyn FnMut(&Binding)) {
    let (s1, s2) = (atom.arg1.slot(), atom.arg2.slot());
    let r = atom.relation;
    match (b[s1], b[s2]) {
        (Some(h), Some(t)) => {
            if kg.contains(&Triple::new(h, r, t)) {
                f(b);
            }
        }
        (Some(h), None) => {
            for &t in kg.tails(r, h) {
                let mut next = *b;
                next[s2] = Some(t);
                f(&next);
            }
        }
        (None, Some(t)) => {
            for &h in kg.heads(r, t) {
                let mut next = *b;
                next[s1] = Some(h);
                f(&next);
            }
        }
        (None, None) => {
            for &(h, t) in kg.pairs(r) {
                if s1 == s2 && h != t {
                    continue;
                }
                let mut next = *b;
                next[s1] = Some(h);
                next[s2] = Some(t);
                f(&next);
            }
        }
    }
}

/// Premise-triple index over all groundings, built once before training.
#[derive(Debug, Clone)]
pub struct GroundingIndex {
    groundings: Vec<Grounding>,
    by_premise: HashMap<Triple, Vec<u32>>,
}

/// Groundings fired by a batch and their distinct conclusions.
#[derive(Debug, Clone, Default)]
pub struct BatchMatch<'a> {
    pub groundings: Vec<&'a Grounding>,
    pub unlabeled: Vec<Triple>,
}

impl GroundingIndex {
    pub fn new(groundings: Vec<Grounding>) -> Self {
        let mut by_premise: HashMap<Triple, Vec<u32>> = HashMap::new();
        for (i, g) in groundings.iter().enumerate() {
            let i = u32::try_from(i).expect("grounding count exceeds u32");
            for p in &g.premises {
                let list = by_premise.entry(*p).or_default();
                if list.last() != Some(&i) {
                    list.push(i);
                }
            }
        }
        GroundingIndex {
            groundings,
            by_premise,
        }
    }

    pub fn groundings(&self) -> &[Grounding] {
        &self.groundings
    }

    pub fn is_empty(&self) -> bool {
        self.groundings.is_empty()
    }

    /// Groundings whose premises all lie in `positives` and whose conclusion
    /// does not, in index order.
    pub fn match_batch(&self, positives: &[Triple]) -> BatchMatch<'_> {
        if self.groundings.is_empty() {
            return BatchMatch::default();
        }
        let batch: HashSet<Triple> = positives.iter().copied().collect();
        let mut candidates: Vec<u32> = positives
            .iter()
            .filter_map(|t| self.by_premise.get(t))
            .flatten()
            .copied()
            .collect();
        candidates.sort_unstable();
        candidates.dedup();

        let mut out = BatchMatch::default();
        let mut seen = HashSet::new();
        for i in candidates {
            let g = &self.groundings[i as usize];
            if g.premises.iter().all(|p| batch.contains(p)) && !batch.contains(&g.conclusion) {
                if seen.insert(g.conclusion) {
                    out.unlabeled.push(g.conclusion);
                }
                out.groundings.push(g);
            }
        }
        out
    }
}
