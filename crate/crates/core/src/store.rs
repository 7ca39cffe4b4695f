//! Triple ingestion, vocabulary interning and the indexed observed-triple set.
//!
//! Triple files are UTF-8, one `head<TAB>relation<TAB>tail` per line, no
//! header. Lines starting with `#` and blank lines are skipped. Ids are
//! assigned in first-appearance order, so loading the same files in the same
//! order always yields the same vocabularies.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationId(pub u32);

impl EntityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl RelationId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: EntityId,
}

impl Triple {
    pub fn new(head: EntityId, relation: RelationId, tail: EntityId) -> Self {
        Triple {
            head,
            relation,
            tail,
        }
    }
}

/// Dense string interner. Ids are contiguous from 0.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = u32::try_from(self.names.len()).expect("vocabulary exceeds u32 ids");
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Stable 64-bit fingerprint of the ordered symbol list.
    pub fn fingerprint(&self) -> u64 {
        let mut hasher = Sha256::new();
        for name in &self.names {
            hasher.update(name.as_bytes());
            hasher.update(b"\n");
        }
        let digest = hasher.finalize();
        let mut bytes = [0u8; 8];
        bytes.copy_from_slice(&digest[..8]);
        u64::from_le_bytes(bytes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VocabMode {
    /// Unknown symbols are interned.
    Extend,
    /// Unknown symbols are an error.
    Frozen,
}

/// Result of reading one triple file.
#[derive(Debug, Clone, Default)]
pub struct LoadedTriples {
    /// Distinct triples in first-appearance order.
    pub triples: Vec<Triple>,
    /// Number of lines dropped as repeats of an earlier line.
    pub duplicates: usize,
}

/// Entity and relation vocabularies shared by every split.
#[derive(Debug, Clone, Default)]
pub struct Vocabularies {
    pub entities: Vocabulary,
    pub relations: Vocabulary,
}

impl Vocabularies {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn load_triples(&mut self, path: impl AsRef<Path>, mode: VocabMode) -> Result<LoadedTriples> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        self.read_triples(BufReader::new(file), &path.display().to_string(), mode)
    }

    /// Parses triples from any reader. `origin` names the source in errors.
    pub fn read_triples<R: BufRead>(
        &mut self,
        reader: R,
        origin: &str,
        mode: VocabMode,
    ) -> Result<LoadedTriples> {
        let mut out = LoadedTriples::default();
        let mut seen = HashSet::new();
        for (lineno, line) in reader.lines().enumerate() {
            let lineno = lineno + 1;
            let line = line.map_err(|e| Error::io(origin, e))?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
                return Err(Error::Parse {
                    origin: origin.to_owned(),
                    line: lineno,
                    message: format!(
                        "expected three non-empty tab-separated fields, found {}",
                        fields.len()
                    ),
                });
            }
            let triple = match mode {
                VocabMode::Extend => Triple::new(
                    EntityId(self.entities.intern(fields[0])),
                    RelationId(self.relations.intern(fields[1])),
                    EntityId(self.entities.intern(fields[2])),
                ),
                VocabMode::Frozen => {
                    let lookup = |vocab: &Vocabulary, kind: &'static str, name: &str| {
                        vocab.get(name).ok_or_else(|| Error::UnknownSymbol {
                            origin: origin.to_owned(),
                            line: lineno,
                            kind,
                            name: name.to_owned(),
                        })
                    };
                    Triple::new(
                        EntityId(lookup(&self.entities, "entity", fields[0])?),
                        RelationId(lookup(&self.relations, "relation", fields[1])?),
                        EntityId(lookup(&self.entities, "entity", fields[2])?),
                    )
                }
            };
            if seen.insert(triple) {
                out.triples.push(triple);
            } else {
                out.duplicates += 1;
            }
        }
        if out.duplicates > 0 {
            log::warn!("{origin}: dropped {} duplicate triples", out.duplicates);
        }
        Ok(out)
    }

    pub fn entity(&self, name: &str) -> Option<EntityId> {
        self.entities.get(name).map(EntityId)
    }

    pub fn relation(&self, name: &str) -> Option<RelationId> {
        self.relations.get(name).map(RelationId)
    }

    pub fn write_triple<W: Write>(&self, out: &mut W, t: Triple) -> std::io::Result<()> {
        writeln!(
            out,
            "{}\t{}\t{}",
            self.entities.name(t.head.0),
            self.relations.name(t.relation.0),
            self.entities.name(t.tail.0)
        )
    }

    pub fn write_triples<W: Write>(&self, out: &mut W, triples: &[Triple]) -> std::io::Result<()> {
        for &t in triples {
            self.write_triple(out, t)?;
        }
        Ok(())
    }
}

/// Observed training triples plus the held-out splits, indexed for grounding
/// joins and filtered ranking. Immutable once built.
#[derive(Debug, Clone)]
pub struct KnowledgeGraph {
    vocab: Vocabularies,
    train: Vec<Triple>,
    valid: Vec<Triple>,
    test: Vec<Triple>,
    observed: HashSet<Triple>,
    filter_index: HashSet<Triple>,
    by_relation: Vec<Vec<(EntityId, EntityId)>>,
    tails_of: HashMap<(RelationId, EntityId), Vec<EntityId>>,
    heads_of: HashMap<(RelationId, EntityId), Vec<EntityId>>,
}

impl KnowledgeGraph {
    /// Builds the graph from already-interned splits. `train` becomes the
    /// observed set; all three splits feed the ranking filter.
    pub fn new(vocab: Vocabularies, train: Vec<Triple>, valid: Vec<Triple>, test: Vec<Triple>) -> Self {
        let mut observed = HashSet::with_capacity(train.len());
        let mut dedup_train = Vec::with_capacity(train.len());
        for t in train {
            if observed.insert(t) {
                dedup_train.push(t);
            }
        }
        let mut by_relation = vec![Vec::new(); vocab.relations.len()];
        let mut tails_of: HashMap<_, Vec<_>> = HashMap::new();
        let mut heads_of: HashMap<_, Vec<_>> = HashMap::new();
        for t in &dedup_train {
            by_relation[t.relation.index()].push((t.head, t.tail));
            tails_of.entry((t.relation, t.head)).or_default().push(t.tail);
            heads_of.entry((t.relation, t.tail)).or_default().push(t.head);
        }
        let filter_index = dedup_train
            .iter()
            .chain(valid.iter())
            .chain(test.iter())
            .copied()
            .collect();
        KnowledgeGraph {
            vocab,
            train: dedup_train,
            valid,
            test,
            observed,
            filter_index,
            by_relation,
            tails_of,
            heads_of,
        }
    }

    /// Loads train (extending the vocabulary) and optional valid/test splits
    /// (frozen against the training vocabulary).
    pub fn load(train: impl AsRef<Path>, valid: Option<&Path>, test: Option<&Path>) -> Result<Self> {
        let mut vocab = Vocabularies::new();
        let train = vocab.load_triples(train, VocabMode::Extend)?.triples;
        let valid = match valid {
            Some(p) => vocab.load_triples(p, VocabMode::Frozen)?.triples,
            None => Vec::new(),
        };
        let test = match test {
            Some(p) => vocab.load_triples(p, VocabMode::Frozen)?.triples,
            None => Vec::new(),
        };
        Ok(Self::new(vocab, train, valid, test))
    }

    pub fn vocab(&self) -> &Vocabularies {
        &self.vocab
    }

    pub fn num_entities(&self) -> usize {
        self.vocab.entities.len()
    }

    pub fn num_relations(&self) -> usize {
        self.vocab.relations.len()
    }

    pub fn train(&self) -> &[Triple] {
        &self.train
    }

    pub fn valid(&self) -> &[Triple] {
        &self.valid
    }

    pub fn test(&self) -> &[Triple] {
        &self.test
    }

    /// Membership in the observed (training) set.
    pub fn contains(&self, t: &Triple) -> bool {
        self.observed.contains(t)
    }

    /// Membership in any split; used to filter ranking candidates.
    pub fn in_filter(&self, t: &Triple) -> bool {
        self.filter_index.contains(t)
    }

    pub fn pairs(&self, relation: RelationId) -> &[(EntityId, EntityId)] {
        self.by_relation
            .get(relation.index())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn tails(&self, relation: RelationId, head: EntityId) -> &[EntityId] {
        self.tails_of
            .get(&(relation, head))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn heads(&self, relation: RelationId, tail: EntityId) -> &[EntityId] {
        self.heads_of
            .get(&(relation, tail))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}
