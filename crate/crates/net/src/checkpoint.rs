//! On-disk format: the magic bytes, a little-endian u64 header length, a JSON
//! header, then every tensor as little-endian f64 in header order (model
//! parameters, squared-gradient averages, squared-update averages).

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::model::{Model, ModelConfig, ParamId, Params, Vocab};
use crate::optim::{AdaDelta, AdaDeltaConfig};
use crate::train::{TrainConfig, Trainer};
use crate::NetError;

const MAGIC: &[u8; 8] = b"ENTAILCK";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct TensorEntry {
    name: String,
    rows: usize,
    cols: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    version: u32,
    model: ModelConfig,
    train: TrainConfig,
    optimizer: AdaDeltaConfig,
    vocab: Vec<String>,
    /// Completed epochs; the shuffle stream of the next epoch follows from
    /// this and the run seed.
    epoch: usize,
    tensors: Vec<TensorEntry>,
}

fn groups(t: &Trainer) -> [(&'static str, &Params); 3] {
    [("", &t.model.params), ("sq_grad.", &t.optimizer.sq_grad), ("sq_update.", &t.optimizer.sq_update)]
}

pub fn to_bytes(t: &Trainer) -> Result<Vec<u8>, NetError> {
    let mut tensors = Vec::new();
    for (prefix, params) in groups(t) {
        for (id, a) in ParamId::ALL.iter().zip(&params.tensors) {
            tensors.push(TensorEntry { name: format!("{prefix}{}", id.name()), rows: a.nrows(), cols: a.ncols() });
        }
    }
    let header = Header {
        version: FORMAT_VERSION,
        model: t.model.config.clone(),
        train: t.config.clone(),
        optimizer: t.optimizer.config,
        vocab: t.model.vocab.words().to_vec(),
        epoch: t.epoch,
        tensors,
    };
    let json = serde_json::to_vec(&header)?;
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    for (_, params) in groups(t) {
        for a in &params.tensors {
            for v in a.iter() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    Ok(out)
}

pub fn from_bytes(bytes: &[u8]) -> Result<Trainer, NetError> {
    let mut r = bytes;
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic).map_err(|_| NetError::Checkpoint("truncated magic".into()))?;
    if &magic != MAGIC {
        return Err(NetError::Checkpoint("not a checkpoint file".into()));
    }
    let mut len = [0u8; 8];
    r.read_exact(&mut len).map_err(|_| NetError::Checkpoint("truncated header length".into()))?;
    let len = u64::from_le_bytes(len) as usize;
    if r.len() < len {
        return Err(NetError::Checkpoint("truncated header".into()));
    }
    let header: Header = serde_json::from_slice(&r[..len])?;
    r = &r[len..];
    if header.version != FORMAT_VERSION {
        return Err(NetError::Checkpoint(format!("unsupported version {}", header.version)));
    }
    let vocab = Vocab::new(&header.vocab);
    let expected = Params::shapes(&header.model, vocab.len());
    let n = ParamId::ALL.len();
    if header.tensors.len() != 3 * n {
        return Err(NetError::Checkpoint(format!("expected {} tensors, found {}", 3 * n, header.tensors.len())));
    }
    let mut all = Vec::with_capacity(3 * n);
    for (k, entry) in header.tensors.iter().enumerate() {
        let shape = expected[k % n];
        if (entry.rows, entry.cols) != shape {
            return Err(NetError::Shape { what: "checkpoint tensor", expected: shape, found: (entry.rows, entry.cols) });
        }
        let count = entry.rows * entry.cols;
        if r.len() < 8 * count {
            return Err(NetError::Checkpoint(format!("tensor {} is truncated", entry.name)));
        }
        let values: Vec<f64> =
            r[..8 * count].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        r = &r[8 * count..];
        all.push(Array2::from_shape_vec(shape, values).expect("shape checked"));
    }
    if !r.is_empty() {
        return Err(NetError::Checkpoint(format!("{} trailing bytes", r.len())));
    }
    let sq_update = all.split_off(2 * n);
    let sq_grad = all.split_off(n);
    let model = Model { config: header.model, vocab, params: Params { tensors: all } };
    let optimizer = AdaDelta {
        config: header.optimizer,
        sq_grad: Params { tensors: sq_grad },
        sq_update: Params { tensors: sq_update },
    };
    Ok(Trainer { model, optimizer, config: header.train, epoch: header.epoch })
}

pub fn save(t: &Trainer, path: impl AsRef<Path>) -> Result<(), NetError> {
    let path = path.as_ref();
    let bytes = to_bytes(t)?;
    let mut f = fs::File::create(path).map_err(|e| NetError::io(path, e))?;
    f.write_all(&bytes).map_err(|e| NetError::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<Trainer, NetError> {
    let path = path.as_ref();
    from_bytes(&fs::read(path).map_err(|e| NetError::io(path, e))?)
}
