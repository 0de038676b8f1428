//! Versioned little-endian checkpoint format with a SHA-256 trailer.
//!
//! ```text
//! magic "RMRLCKPT" | u32 version | u64 global_step
//! u32 len | config text (utf-8)
//! u32 obs_dim | u32 n_actions | u32 n_hidden | u32 hidden[n_hidden]
//! u64 n_params | f64 params[n]
//! f64 lr | f64 beta1 | f64 beta2 | f64 eps | u64 t | f64 m[n] | f64 v[n]
//! [u8; 32] sha256 of everything above
//! ```

use std::io::{Cursor, Read};
use std::path::Path;

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::env::{ActionId, OBS_DIM};
use crate::error::{Error, Result};
use crate::learner::{Adam, NetworkShape, PolicyNet};

pub const MAGIC: &[u8; 8] = b"RMRLCKPT";
pub const VERSION: u32 = 1;
const DIGEST_LEN: usize = 32;
/// Keeps parameter-count arithmetic far from overflow on hostile input.
const MAX_WIDTH: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub global_step: u64,
    /// The emitted experiment config the run was started with.
    pub config_text: String,
    pub shape: NetworkShape,
    pub params: Vec<f64>,
    pub adam: Adam,
}

/// Network layout implied by an experiment config.
pub fn shape_for(cfg: &ExperimentConfig) -> NetworkShape {
    NetworkShape {
        obs_dim: OBS_DIM,
        n_actions: ActionId::COUNT,
        hidden: cfg.learner.hidden.clone(),
    }
}

impl Checkpoint {
    pub fn encode(&self) -> Vec<u8> {
        let n = self.params.len();
        let mut out = Vec::with_capacity(64 + self.config_text.len() + 24 * n);
        out.extend_from_slice(MAGIC);
        out.write_u32::<LE>(VERSION).unwrap();
        out.write_u64::<LE>(self.global_step).unwrap();
        out.write_u32::<LE>(self.config_text.len() as u32).unwrap();
        out.extend_from_slice(self.config_text.as_bytes());
        out.write_u32::<LE>(self.shape.obs_dim as u32).unwrap();
        out.write_u32::<LE>(self.shape.n_actions as u32).unwrap();
        out.write_u32::<LE>(self.shape.hidden.len() as u32).unwrap();
        for &h in &self.shape.hidden {
            out.write_u32::<LE>(h as u32).unwrap();
        }
        out.write_u64::<LE>(n as u64).unwrap();
        let floats = |out: &mut Vec<u8>, xs: &[f64]| xs.iter().for_each(|&x| out.write_f64::<LE>(x).unwrap());
        floats(&mut out, &self.params);
        let a = &self.adam;
        floats(&mut out, &[a.lr, a.beta1, a.beta2, a.eps]);
        out.write_u64::<LE>(a.t).unwrap();
        floats(&mut out, &a.m);
        floats(&mut out, &a.v);
        let digest = Sha256::digest(&out);
        out.extend_from_slice(&digest);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: &str| Error::Checkpoint(msg.to_string());
        if bytes.len() < MAGIC.len() + DIGEST_LEN || &bytes[..MAGIC.len()] != MAGIC {
            return Err(bad("not a checkpoint file"));
        }
        let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
        if Sha256::digest(body).as_slice() != digest {
            return Err(bad("checksum mismatch"));
        }
        let mut r = Cursor::new(&body[MAGIC.len()..]);
        let trunc = |_| bad("truncated");
        let version = r.read_u32::<LE>().map_err(trunc)?;
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let global_step = r.read_u64::<LE>().map_err(trunc)?;
        let len = r.read_u32::<LE>().map_err(trunc)? as usize;
        let config_text = String::from_utf8(take(&mut r, len)?).map_err(|_| bad("config is not utf-8"))?;
        let obs_dim = r.read_u32::<LE>().map_err(trunc)? as usize;
        let n_actions = r.read_u32::<LE>().map_err(trunc)? as usize;
        let n_hidden = r.read_u32::<LE>().map_err(trunc)? as usize;
        if n_hidden > remaining(&r) / 4 {
            return Err(bad("truncated"));
        }
        let hidden = (0..n_hidden)
            .map(|_| r.read_u32::<LE>().map(|h| h as usize))
            .collect::<std::io::Result<Vec<_>>>()
            .map_err(trunc)?;
        let shape = NetworkShape {
            obs_dim,
            n_actions,
            hidden,
        };
        let n = r.read_u64::<LE>().map_err(trunc)?;
        // params, m, v plus five scalars must fit in what is left.
        if n > (remaining(&r) as u64).saturating_sub(40) / 24 {
            return Err(bad("truncated"));
        }
        let n = n as usize;
        let params = floats(&mut r, n)?;
        let [lr, beta1, beta2, eps]: [f64; 4] = floats(&mut r, 4)?.try_into().expect("four floats");
        let t = r.read_u64::<LE>().map_err(trunc)?;
        let m = floats(&mut r, n)?;
        let v = floats(&mut r, n)?;
        if remaining(&r) != 0 {
            return Err(bad("trailing bytes"));
        }
        let ckpt = Checkpoint {
            global_step,
            config_text,
            shape,
            params,
            adam: Adam {
                lr,
                beta1,
                beta2,
                eps,
                t,
                m,
                v,
            },
        };
        let s = &ckpt.shape;
        if std::iter::once(s.obs_dim).chain(Some(s.n_actions)).chain(s.hidden.iter().copied()).any(|d| d > MAX_WIDTH) {
            return Err(bad("layer width out of range"));
        }
        let expected = PolicyNet::new(ckpt.shape.clone())
            .map_err(|e| Error::Checkpoint(format!("bad network layout: {e}")))?
            .n_params();
        if expected != n {
            return Err(Error::Checkpoint(format!(
                "layout needs {expected} parameters, file has {n}"
            )));
        }
        Ok(ckpt)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, self.encode())?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Self::decode(&bytes)
    }

    /// Parses the embedded config and checks that it describes this network.
    pub fn config(&self) -> Result<ExperimentConfig> {
        let cfg = ExperimentConfig::parse(&self.config_text)
            .map_err(|e| Error::Checkpoint(format!("embedded config: {e}")))?;
        let want = shape_for(&cfg);
        if want != self.shape {
            return Err(Error::Checkpoint(format!(
                "config describes network {want:?} but checkpoint holds {:?}",
                self.shape
            )));
        }
        Ok(cfg)
    }

    pub fn network(&self) -> Result<PolicyNet> {
        PolicyNet::new(self.shape.clone())
    }
}

fn remaining(r: &Cursor<&[u8]>) -> usize {
    r.get_ref().len() - r.position() as usize
}

fn take(r: &mut Cursor<&[u8]>, len: usize) -> Result<Vec<u8>> {
    if len > remaining(r) {
        return Err(Error::Checkpoint("truncated".into()));
    }
    let mut buf = vec![0; len];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn floats(r: &mut Cursor<&[u8]>, n: usize) -> Result<Vec<f64>> {
    if n > remaining(r) / 8 {
        return Err(Error::Checkpoint("truncated".into()));
    }
    (0..n)
        .map(|_| r.read_f64::<LE>().map_err(|_| Error::Checkpoint("truncated".into())))
        .collect()
}

/// Order-sensitive digest of a parameter vector, for isolation checks.
pub fn param_checksum(params: &[f64]) -> [u8; 32] {
    let mut h = Sha256::new();
    for p in params {
        h.update(p.to_le_bytes());
    }
    h.finalize().into()
}
