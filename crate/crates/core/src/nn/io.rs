//! Model directory: `model.json` (config, seed, epoch, optimizer step) and
//! `params.bin`.
//!
//! `params.bin` layout, all little-endian: magic `NCMP`, `u32` version,
//! `u32` tensor count, then per tensor `u32` rows and `u32` cols, then every
//! tensor's data as `f32` in row-major order. Adam moments are not stored.

use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::{ModelConfig, ModelState, Real};
use crate::error::{Error, Result};
use crate::graph::write_atomic;

const MAGIC: &[u8; 4] = b"NCMP";
const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelMeta {
    config: ModelConfig,
    seed: u64,
    epoch: usize,
    adam_step: u64,
}

pub fn save_model<T: Real>(dir: &Path, state: &ModelState<T>) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let meta = ModelMeta {
        config: state.config.clone(),
        seed: state.seed,
        epoch: state.epoch,
        adam_step: state.adam.step,
    };
    let path = dir.join("model.json");
    let mut json = serde_json::to_string_pretty(&meta).map_err(|e| Error::Json {
        path: path.clone(),
        source: e,
    })?;
    json.push('\n');
    write_atomic(&path, json.as_bytes())?;

    let mut bytes = Vec::new();
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    bytes.extend_from_slice(&(state.params.len() as u32).to_le_bytes());
    for p in &state.params {
        bytes.extend_from_slice(&(p.nrows() as u32).to_le_bytes());
        bytes.extend_from_slice(&(p.ncols() as u32).to_le_bytes());
    }
    for p in &state.params {
        for &v in p.iter() {
            bytes.extend_from_slice(&(v.f64() as f32).to_le_bytes());
        }
    }
    write_atomic(&dir.join("params.bin"), &bytes)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::invalid(format!("params.bin truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(chunk.try_into().expect("slice length is N"))
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take()?) as usize)
    }
}

pub fn load_model<T: Real>(dir: &Path) -> Result<ModelState<T>> {
    let path = dir.join("model.json");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let meta: ModelMeta = serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.clone(),
        source: e,
    })?;
    let path = dir.join("params.bin");
    let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
    let mut r = Reader {
        bytes: &bytes,
        pos: 0,
    };
    if &r.take::<4>()? != MAGIC {
        return Err(Error::invalid("params.bin: bad magic"));
    }
    let version = r.u32()?;
    if version != VERSION as usize {
        return Err(Error::invalid(format!("params.bin: unsupported version {version}")));
    }
    let count = r.u32()?;
    let shapes: Vec<(usize, usize)> = (0..count)
        .map(|_| Ok((r.u32()?, r.u32()?)))
        .collect::<Result<_>>()?;
    let mut params = Vec::with_capacity(count);
    for (rows, cols) in shapes {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            data.push(T::of(f32::from_le_bytes(r.take()?) as f64));
        }
        params.push(Array2::from_shape_vec((rows, cols), data).expect("length matches shape"));
    }
    if r.pos != bytes.len() {
        return Err(Error::invalid("params.bin: trailing bytes"));
    }
    let mut state = ModelState::with_params(meta.config, params, meta.seed)?;
    state.epoch = meta.epoch;
    state.adam.step = meta.adam_step;
    Ok(state)
}
