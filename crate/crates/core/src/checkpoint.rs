//! Binary checkpoint container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! magic        8 bytes  "SRKGECK\0"
//! version      u32
//! n_entities   u64
//! n_relations  u64
//! dim          u64
//! entity fp    u64      vocabulary fingerprint
//! relation fp  u64
//! config len   u64
//! config       UTF-8 run configuration snapshot
//! matrices     f64 x (2 n_e d + 2 n_r d): entity re, entity im, relation re, relation im
//! ```

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::EmbeddingSet;
use crate::store::Vocabularies;

const MAGIC: &[u8; 8] = b"SRKGECK\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub embeddings: EmbeddingSet,
    pub entity_fingerprint: u64,
    pub relation_fingerprint: u64,
    /// Configuration snapshot the run was started with.
    pub config: String,
}

impl Checkpoint {
    pub fn new(embeddings: EmbeddingSet, vocab: &Vocabularies, config: String) -> Self {
        Checkpoint {
            embeddings,
            entity_fingerprint: vocab.entities.fingerprint(),
            relation_fingerprint: vocab.relations.fingerprint(),
            config,
        }
    }

    /// Refuses vocabularies that differ from the ones the model was trained on.
    pub fn check_vocab(&self, vocab: &Vocabularies) -> Result<()> {
        let e = &self.embeddings;
        if e.num_entities() != vocab.entities.len() || e.num_relations() != vocab.relations.len() {
            return Err(Error::VocabMismatch(format!(
                "checkpoint has {} entities / {} relations, data has {} / {}",
                e.num_entities(),
                e.num_relations(),
                vocab.entities.len(),
                vocab.relations.len()
            )));
        }
        if self.entity_fingerprint != vocab.entities.fingerprint()
            || self.relation_fingerprint != vocab.relations.fingerprint()
        {
            return Err(Error::VocabMismatch(
                "vocabulary fingerprints differ from the checkpoint".into(),
            ));
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let e = &self.embeddings;
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        for v in [
            e.num_entities() as u64,
            e.num_relations() as u64,
            e.dim() as u64,
            self.entity_fingerprint,
            self.relation_fingerprint,
            self.config.len() as u64,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(self.config.as_bytes())?;
        for m in e.matrices() {
            for v in m {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let bad = |m: &str| Error::Checkpoint(m.to_owned());
        let io = |e: std::io::Error| Error::Checkpoint(format!("truncated or unreadable: {e}"));

        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != MAGIC {
            return Err(bad("not a checkpoint file"));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4).map_err(io)?;
        let version = u32::from_le_bytes(b4);
        if version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported format version {version}")));
        }
        let read_u64 = |r: &mut R| -> Result<u64> {
            let mut b8 = [0u8; 8];
            r.read_exact(&mut b8).map_err(io)?;
            Ok(u64::from_le_bytes(b8))
        };
        let n_e = read_u64(&mut r)? as usize;
        let n_r = read_u64(&mut r)? as usize;
        let dim = read_u64(&mut r)? as usize;
        let entity_fingerprint = read_u64(&mut r)?;
        let relation_fingerprint = read_u64(&mut r)?;
        let config_len = read_u64(&mut r)? as usize;
        if dim == 0 {
            return Err(bad("zero dimension"));
        }
        let mut config = vec![0u8; config_len];
        r.read_exact(&mut config).map_err(io)?;
        let config = String::from_utf8(config).map_err(|_| bad("config snapshot is not UTF-8"))?;

        let mut read_matrix = |rows: usize| -> Result<Vec<f64>> {
            let mut buf = vec![0u8; rows * dim * 8];
            r.read_exact(&mut buf).map_err(io)?;
            Ok(buf
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect())
        };
        let entity_re = read_matrix(n_e)?;
        let entity_im = read_matrix(n_e)?;
        let relation_re = read_matrix(n_r)?;
        let relation_im = read_matrix(n_r)?;
        let mut trailing = [0u8; 1];
        if r.read(&mut trailing).map_err(io)? != 0 {
            return Err(bad("trailing bytes after matrices"));
        }
        Ok(Checkpoint {
            embeddings: EmbeddingSet::from_parts(dim, entity_re, entity_im, relation_re, relation_im),
            entity_fingerprint,
            relation_fingerprint,
            config,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file))
    }
}
