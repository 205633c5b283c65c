//! Single-file binary checkpoints.
//!
//! Layout (little endian):
//! ```text
//! magic "SGGCKPT\0" | version u32
//! ontology_hash (u32 len + utf8) | config json (u32 len + utf8)
//! epoch u64 | step u64
//! n_params u32 | per param: name (u32 len + utf8), rows u64, cols u64, rows*cols f64
//! sha256 of all preceding bytes (32 bytes)
//! ```

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::data::scenes::write_atomic;
use crate::error::{Error, Result};
use crate::ontology::Ontology;
use crate::params::{Param, ParamStore};

const MAGIC: &[u8; 8] = b"SGGCKPT\0";
const VERSION: u32 = 1;

/// Plain SGD keeps no per-parameter state; only progress counters are stored.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OptimizerState {
    pub epoch: u64,
    pub step: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub params: ParamStore,
    pub optimizer: OptimizerState,
    pub ontology_hash: String,
    /// JSON snapshot of the run configuration.
    pub config: String,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        put_str(&mut out, &self.ontology_hash);
        put_str(&mut out, &self.config);
        out.extend_from_slice(&self.optimizer.epoch.to_le_bytes());
        out.extend_from_slice(&self.optimizer.step.to_le_bytes());
        let params = self.params.params();
        out.extend_from_slice(&(params.len() as u32).to_le_bytes());
        for p in params {
            put_str(&mut out, &p.name);
            out.extend_from_slice(&(p.rows as u64).to_le_bytes());
            out.extend_from_slice(&(p.cols as u64).to_le_bytes());
            for v in &p.data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < MAGIC.len() + 4 + 32 {
            return Err(Error::Format("file too short".into()));
        }
        if &bytes[..MAGIC.len()] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let (body, digest) = bytes.split_at(bytes.len() - 32);
        if Sha256::digest(body).as_slice() != digest {
            return Err(Error::Format("checksum mismatch (truncated or corrupted file)".into()));
        }
        let mut r = Reader { buf: body, pos: MAGIC.len() };
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let ontology_hash = r.string()?;
        let config = r.string()?;
        let optimizer = OptimizerState { epoch: r.u64()?, step: r.u64()? };
        let n = r.u32()? as usize;
        let mut params = Vec::with_capacity(n);
        for _ in 0..n {
            let name = r.string()?;
            let rows = r.u64()? as usize;
            let cols = r.u64()? as usize;
            let len = rows
                .checked_mul(cols)
                .filter(|l| l.checked_mul(8).is_some_and(|b| b <= r.remaining()))
                .ok_or_else(|| Error::Format(format!("parameter {name} exceeds file")))?;
            let data = (0..len).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
            params.push(Param { name, rows, cols, data });
        }
        if r.remaining() != 0 {
            return Err(Error::Format("trailing bytes".into()));
        }
        Ok(Checkpoint { params: ParamStore::from_params(params), optimizer, ontology_hash, config })
    }

    pub fn check_ontology(&self, ontology: &Ontology) -> Result<()> {
        let found = ontology.content_hash();
        if found != self.ontology_hash {
            return Err(Error::OntologyMismatch { expected: self.ontology_hash.clone(), found });
        }
        Ok(())
    }
}

pub fn save_checkpoint(ckpt: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), &ckpt.to_bytes())
}

/// Reads a checkpoint and refuses it unless it was trained against `ontology`.
pub fn load_checkpoint(path: impl AsRef<Path>, ontology: &Ontology) -> Result<Checkpoint> {
    let ckpt = read_checkpoint(path)?;
    ckpt.check_ontology(ontology)?;
    Ok(ckpt)
}

/// Reads a checkpoint without checking which ontology it belongs to.
pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Checkpoint::from_bytes(&bytes)
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        if self.remaining() < n {
            return Err(Error::Format("unexpected end of data".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::Format("invalid utf-8".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample() -> Checkpoint {
        let mut store = ParamStore::new();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (name, r, c) in [("a", 3, 4), ("b", 1, 7), ("c", 5, 5)] {
            let id = store.add(name, r, c);
            store.init_glorot(id, 1.0, &mut rng);
        }
        Checkpoint {
            params: store,
            optimizer: OptimizerState { epoch: 4, step: 99 },
            ontology_hash: "abc".into(),
            config: "{\"x\":1}".into(),
        }
    }

    #[test]
    fn bit_exact_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        let ck = sample();
        save_checkpoint(&ck, &path).unwrap();
        let back = read_checkpoint(&path).unwrap();
        for ((_, a), (_, b)) in ck.params.iter().zip(back.params.iter()) {
            let bits_a: Vec<u64> = a.data.iter().map(|v| v.to_bits()).collect();
            let bits_b: Vec<u64> = b.data.iter().map(|v| v.to_bits()).collect();
            assert_eq!(bits_a, bits_b);
        }
        assert_eq!(back, ck);
    }

    #[test]
    fn truncated_file_is_rejected() {
        let bytes = sample().to_bytes();
        for cut in [0, 10, bytes.len() / 2, bytes.len() - 1] {
            assert!(matches!(Checkpoint::from_bytes(&bytes[..cut]), Err(Error::Format(_))));
        }
    }

    #[test]
    fn ontology_mismatch_is_refused() {
        let o = crate::data::synthetic::synthetic_ontology(2, 2, 1.0);
        let mut ck = sample();
        ck.ontology_hash = o.content_hash();
        ck.check_ontology(&o).unwrap();
        let edited = crate::data::synthetic::synthetic_ontology(3, 2, 1.0);
        assert!(matches!(ck.check_ontology(&edited), Err(Error::OntologyMismatch { .. })));
    }
}
