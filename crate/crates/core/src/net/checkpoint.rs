//! Binary checkpoint container.
//!
//! ```text
//! b"TPWCKPT1"
//! u64 little-endian: manifest length in bytes
//! manifest: UTF-8 JSON {"meta": {...}, "tensors": [{name, shape, dtype: "f32le", byte_offset}]}
//! payload: raw little-endian f32 values, tensors concatenated in manifest order
//! ```
//! `byte_offset` is relative to the start of the payload.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ActorCriticParams, Adam, AdamConfig, Layout, NetConfig, NetError};

pub const MAGIC: &[u8; 8] = b"TPWCKPT1";
const DTYPE: &str = "f32le";
const OPTIM_M: &str = "optim.m/";
const OPTIM_V: &str = "optim.v/";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub dtype: String,
    pub byte_offset: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdamMeta {
    pub step: u64,
    pub config: AdamConfig,
}

/// Non-tensor information stored alongside the weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub net: NetConfig,
    /// Whether the policy expects normalised observations.
    pub obs_norm: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agent: Option<String>,
    #[serde(default)]
    pub episode: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adam: Option<AdamMeta>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    meta: CheckpointMeta,
    tensors: Vec<TensorEntry>,
}

/// An agent's network, optionally with its optimizer state.
#[derive(Debug, Clone)]
pub struct AgentCheckpoint {
    pub meta: CheckpointMeta,
    pub params: ActorCriticParams<f32>,
    pub optimizer: Option<Adam<f32>>,
}

impl AgentCheckpoint {
    pub fn new(params: ActorCriticParams<f32>, obs_norm: bool) -> Self {
        AgentCheckpoint {
            meta: CheckpointMeta {
                net: params.layout().config().clone(),
                obs_norm,
                agent: None,
                episode: 0,
                seed: None,
                preset: None,
                adam: None,
            },
            params,
            optimizer: None,
        }
    }

    pub fn with_optimizer(mut self, adam: Adam<f32>) -> Self {
        self.optimizer = Some(adam);
        self
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut meta = self.meta.clone();
        meta.net = self.params.layout().config().clone();
        meta.adam = self.optimizer.as_ref().map(|a| AdamMeta {
            step: a.step_count(),
            config: a.config,
        });

        let mut entries = Vec::new();
        let mut offset = 0u64;
        let layout = self.params.layout();
        let mut payload: Vec<u8> = Vec::with_capacity(4 * layout.len() * if self.optimizer.is_some() { 3 } else { 1 });
        let mut add = |name: String, shape: Vec<usize>, values: &[f32]| {
            entries.push(TensorEntry { name, shape, dtype: DTYPE.into(), byte_offset: offset });
            offset += 4 * values.len() as u64;
            for v in values {
                payload.extend_from_slice(&v.to_le_bytes());
            }
        };
        for t in layout.tensors() {
            add(t.name.clone(), t.shape.clone(), &self.params.as_slice()[t.range()]);
        }
        if let Some(adam) = &self.optimizer {
            for t in layout.tensors() {
                add(format!("{OPTIM_M}{}", t.name), t.shape.clone(), &adam.first_moment()[t.range()]);
            }
            for t in layout.tensors() {
                add(format!("{OPTIM_V}{}", t.name), t.shape.clone(), &adam.second_moment()[t.range()]);
            }
        }

        let manifest = serde_json::to_vec(&Manifest { meta, tensors: entries }).expect("manifest serializes");
        let mut out = Vec::with_capacity(8 + 8 + manifest.len() + payload.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(manifest.len() as u64).to_le_bytes());
        out.extend_from_slice(&manifest);
        out.extend_from_slice(&payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, NetError> {
        let corrupt = |m: &str| NetError::CheckpointCorrupt(m.to_string());
        if bytes.len() < 16 || &bytes[0..8] != MAGIC {
            return Err(corrupt("bad magic"));
        }
        let mlen = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let manifest_end = 16usize.checked_add(mlen).ok_or_else(|| corrupt("manifest length overflow"))?;
        if manifest_end > bytes.len() {
            return Err(corrupt("truncated manifest"));
        }
        let manifest: Manifest = serde_json::from_slice(&bytes[16..manifest_end])
            .map_err(|e| NetError::CheckpointCorrupt(format!("manifest: {e}")))?;
        let payload = &bytes[manifest_end..];

        let read = |e: &TensorEntry| -> Result<Vec<f32>, NetError> {
            if e.dtype != DTYPE {
                return Err(NetError::CheckpointCorrupt(format!("{}: unsupported dtype {}", e.name, e.dtype)));
            }
            let n: usize = e.shape.iter().product();
            let start = e.byte_offset as usize;
            let end = start + 4 * n;
            if end > payload.len() {
                return Err(NetError::CheckpointCorrupt(format!("{}: payload truncated", e.name)));
            }
            Ok(payload[start..end]
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect())
        };

        let layout = Layout::new(manifest.meta.net.clone())?;
        let find = |name: &str| manifest.tensors.iter().find(|e| e.name == name);
        let gather = |prefix: &str| -> Result<Option<Vec<f32>>, NetError> {
            let mut flat = Vec::with_capacity(layout.len());
            for t in layout.tensors() {
                let name = format!("{prefix}{}", t.name);
                let Some(entry) = find(&name) else {
                    if prefix.is_empty() {
                        return Err(NetError::CheckpointCorrupt(format!("missing tensor {name}")));
                    }
                    return Ok(None);
                };
                if entry.shape != t.shape {
                    return Err(NetError::CheckpointCorrupt(format!(
                        "{name}: shape {:?}, expected {:?}",
                        entry.shape, t.shape
                    )));
                }
                flat.extend(read(entry)?);
            }
            Ok(Some(flat))
        };
        let params = ActorCriticParams::from_vec(layout.clone(), gather("")?.unwrap())?;
        let optimizer = match &manifest.meta.adam {
            Some(meta) => {
                let m = gather(OPTIM_M)?.ok_or_else(|| corrupt("optimizer moments missing"))?;
                let v = gather(OPTIM_V)?.ok_or_else(|| corrupt("optimizer moments missing"))?;
                Some(Adam::from_parts(meta.config, m, v, meta.step)?)
            }
            None => None,
        };
        Ok(AgentCheckpoint {
            meta: manifest.meta,
            params,
            optimizer,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), NetError> {
        let bytes = self.to_bytes();
        let tmp = path.with_extension("tmp");
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, NetError> {
        let bytes = fs::read(path)?;
        Self::from_bytes(&bytes)
    }
}

/// Convenience: the network config recorded in a checkpoint, without loading weights.
pub fn peek_config(bytes: &[u8]) -> Result<NetConfig, NetError> {
    Ok(AgentCheckpoint::from_bytes(bytes)?.meta.net)
}
