//! The four pipeline stages behind the command-line tool: ground, train,
//! eval and predict. Each takes a validated [`RunConfig`].

use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::checkpoint::Checkpoint;
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::eval::{self, EvalReport};
use crate::rules::{self, Grounding, GroundingIndex, Propositionalized, Rule};
use crate::soft_label;
use crate::store::{EntityId, KnowledgeGraph, RelationId, Triple, Vocabularies};
use crate::train::{self, TrainingLog};

pub const GROUNDINGS_FILE: &str = "groundings.tsv";
pub const UNLABELED_FILE: &str = "unlabeled.tsv";
pub const CHECKPOINT_FILE: &str = "best.ckpt";
pub const LOG_FILE: &str = "train.log";
pub const CONFIG_FILE: &str = "config.toml";
const LOCK_FILE: &str = ".lock";

/// Exclusive claim on a checkpoint directory, released on drop.
#[derive(Debug)]
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(DirLock { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(Error::Locked(dir.to_owned())),
            Err(e) => Err(Error::io(&path, e)),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

pub fn load_graph(config: &RunConfig) -> Result<KnowledgeGraph> {
    config.validate()?;
    KnowledgeGraph::load(
        config.require_train()?,
        config.paths.valid.as_deref(),
        config.paths.test.as_deref(),
    )
}

/// Rules from the configured file; none when no rule file is configured.
pub fn load_rules(config: &RunConfig, kg: &KnowledgeGraph) -> Result<Vec<Rule>> {
    match &config.paths.rules {
        Some(path) => rules::parse_rules(path, kg.vocab(), config.rules.min_confidence),
        None => Ok(Vec::new()),
    }
}

/// Dataset statistics in the usual dataset-table column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroundStats {
    pub entities: usize,
    pub relations: usize,
    pub labeled: usize,
    pub unlabeled: usize,
    pub groundings: usize,
    pub valid: usize,
    pub test: usize,
    pub rules: usize,
}

impl GroundStats {
    pub fn new(kg: &KnowledgeGraph, rules: &[Rule], p: &Propositionalized) -> Self {
        GroundStats {
            entities: kg.num_entities(),
            relations: kg.num_relations(),
            labeled: kg.train().len(),
            unlabeled: p.unlabeled.len(),
            groundings: p.groundings.len(),
            valid: kg.valid().len(),
            test: kg.test().len(),
            rules: rules.len(),
        }
    }
}

impl fmt::Display for GroundStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>10} {:>8} {:>10} {:>10} {:>10} {:>8} {:>8} {:>6}",
            "n_e", "n_r", "n_l", "n_u", "n_g", "n_v", "n_t", "rules"
        )?;
        write!(
            f,
            "{:>10} {:>8} {:>10} {:>10} {:>10} {:>8} {:>8} {:>6}",
            self.entities,
            self.relations,
            self.labeled,
            self.unlabeled,
            self.groundings,
            self.valid,
            self.test,
            self.rules
        )
    }
}

/// Writes groundings as TSV: rule index, premise triples, `=>`, conclusion.
pub fn write_groundings<W: Write>(out: &mut W, groundings: &[Grounding], vocab: &Vocabularies) -> std::io::Result<()> {
    let name = |t: &Triple| {
        format!(
            "{}\t{}\t{}",
            vocab.entities.name(t.head.0),
            vocab.relations.name(t.relation.0),
            vocab.entities.name(t.tail.0)
        )
    };
    for g in groundings {
        write!(out, "{}", g.rule)?;
        for p in &g.premises {
            write!(out, "\t{}", name(p))?;
        }
        writeln!(out, "\t=>\t{}", name(&g.conclusion))?;
    }
    Ok(())
}

/// Reads the format produced by [`write_groundings`].
pub fn read_groundings<R: BufRead>(reader: R, origin: &str, vocab: &Vocabularies) -> Result<Vec<Grounding>> {
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::io(origin, e))?;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parse_err = |m: &str| Error::Parse {
            origin: origin.to_owned(),
            line: lineno,
            message: m.to_owned(),
        };
        let fields: Vec<&str> = line.split('\t').collect();
        let arrow = fields
            .iter()
            .position(|f| *f == "=>")
            .ok_or_else(|| parse_err("missing `=>`"))?;
        let premise_fields = &fields[1..arrow];
        let conclusion_fields = &fields[arrow + 1..];
        if premise_fields.is_empty() || !premise_fields.len().is_multiple_of(3) || conclusion_fields.len() != 3 {
            return Err(parse_err("expected whole triples around `=>`"));
        }
        let rule: usize = fields[0].parse().map_err(|_| parse_err("bad rule index"))?;
        let triple = |f: &[&str]| -> Result<Triple> {
            let unknown = |kind, name: &str| Error::UnknownSymbol {
                origin: origin.to_owned(),
                line: lineno,
                kind,
                name: name.to_owned(),
            };
            Ok(Triple::new(
                EntityId(vocab.entities.get(f[0]).ok_or_else(|| unknown("entity", f[0]))?),
                RelationId(vocab.relations.get(f[1]).ok_or_else(|| unknown("relation", f[1]))?),
                EntityId(vocab.entities.get(f[2]).ok_or_else(|| unknown("entity", f[2]))?),
            ))
        };
        out.push(Grounding {
            rule,
            premises: premise_fields.chunks(3).map(triple).collect::<Result<_>>()?,
            conclusion: triple(conclusion_fields)?,
        });
    }
    Ok(out)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

/// Propositionalizes the configured rules and writes the grounding and
/// unlabeled-triple files into `out_dir`.
pub fn cmd_ground(config: &RunConfig, out_dir: &Path) -> Result<GroundStats> {
    let kg = load_graph(config)?;
    let rules = load_rules(config, &kg)?;
    let p = rules::propositionalize(&rules, &kg);
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let path = out_dir.join(GROUNDINGS_FILE);
    let mut w = create(&path)?;
    write_groundings(&mut w, &p.groundings, kg.vocab())
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(&path, e))?;

    let path = out_dir.join(UNLABELED_FILE);
    let mut w = create(&path)?;
    kg.vocab()
        .write_triples(&mut w, &p.unlabeled)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(&path, e))?;

    Ok(GroundStats::new(&kg, &rules, &p))
}

#[derive(Debug, Clone)]
pub struct TrainSummary {
    pub checkpoint: PathBuf,
    pub stats: GroundStats,
    pub log: TrainingLog,
}

/// Grounds on the fly, trains, and persists the best checkpoint, the
/// training log and the config snapshot into the checkpoint directory.
pub fn cmd_train(config: &RunConfig) -> Result<TrainSummary> {
    let dir = config.require_checkpoint_dir()?;
    let kg = load_graph(config)?;
    let rules = load_rules(config, &kg)?;
    let _lock = DirLock::acquire(dir)?;

    let p = rules::propositionalize(&rules, &kg);
    let stats = GroundStats::new(&kg, &rules, &p);
    log::info!("{} rules, {} groundings, {} unlabeled", rules.len(), p.groundings.len(), p.unlabeled.len());
    let index = GroundingIndex::new(p.groundings);
    let outcome = train::train(&kg, &rules, &index, &config.train)?;

    let snapshot = config.to_toml();
    let checkpoint = dir.join(CHECKPOINT_FILE);
    Checkpoint::new(outcome.embeddings, kg.vocab(), snapshot.clone()).save(&checkpoint)?;

    let path = dir.join(LOG_FILE);
    let mut w = create(&path)?;
    outcome
        .log
        .write_lines(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(&path, e))?;
    let path = dir.join(CONFIG_FILE);
    fs::write(&path, snapshot).map_err(|e| Error::io(&path, e))?;

    Ok(TrainSummary {
        checkpoint,
        stats,
        log: outcome.log,
    })
}

/// Loads a checkpoint and verifies it against the configured vocabulary.
pub fn load_checkpoint(kg: &KnowledgeGraph, path: &Path) -> Result<Checkpoint> {
    let ck = Checkpoint::load(path)?;
    ck.check_vocab(kg.vocab())?;
    Ok(ck)
}

/// Filtered evaluation of `checkpoint` on the configured test split.
pub fn cmd_eval(config: &RunConfig, checkpoint: &Path) -> Result<EvalReport> {
    let kg = load_graph(config)?;
    let ck = load_checkpoint(&kg, checkpoint)?;
    let report = eval::evaluate(&ck.embeddings, kg.test(), &kg, config.eval.tie_mode)?;
    if let Some(path) = &config.eval.rank_dump {
        let mut w = create(path)?;
        report
            .write_rank_dump(&mut w, kg.vocab())
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))?;
    }
    Ok(report)
}

/// Writes `head relation tail truth soft_label` for every unlabeled triple,
/// using all groundings at once.
pub fn cmd_predict<W: Write>(config: &RunConfig, checkpoint: &Path, out: &mut W) -> Result<usize> {
    let kg = load_graph(config)?;
    let ck = load_checkpoint(&kg, checkpoint)?;
    let rules = load_rules(config, &kg)?;
    let p = rules::propositionalize(&rules, &kg);
    let refs: Vec<&Grounding> = p.groundings.iter().collect();
    let labels = soft_label::predict_soft_labels(&p.unlabeled, &refs, &rules, &ck.embeddings, config.train.slack_c);
    let vocab = kg.vocab();
    let io = |e| Error::io("<predict output>", e);
    for l in labels.iter() {
        writeln!(
            out,
            "{}\t{}\t{}\t{:.6}\t{:.6}",
            vocab.entities.name(l.triple.head.0),
            vocab.relations.name(l.triple.relation.0),
            vocab.entities.name(l.triple.tail.0),
            l.truth,
            l.label
        )
        .map_err(io)?;
    }
    out.flush().map_err(io)?;
    Ok(labels.len())
}

/// Reads the grounding file written by [`cmd_ground`].
pub fn load_groundings(path: &Path, vocab: &Vocabularies) -> Result<Vec<Grounding>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_groundings(BufReader::new(file), &path.display().to_string(), vocab)
}
