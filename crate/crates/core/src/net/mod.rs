//! Shared-trunk actor-critic network with hand-written forward and backward
//! passes, Adam, and global-norm gradient clipping.
//!
//! Parameters live in one flat vector described by a [`Layout`]; gradients
//! and optimizer moments share that layout.

mod checkpoint;
mod init;
mod model;
mod optim;
mod params;
mod scalar;

use thiserror::Error;

pub use checkpoint::{peek_config, AdamMeta, AgentCheckpoint, CheckpointMeta, TensorEntry, MAGIC};
pub use init::{init_params, init_params_indexed, orthogonal};
pub use model::{backward, forward, ForwardTrace, OutputGrads, LAYER_NORM_EPS};
pub use optim::{clip_global_norm, Adam, AdamConfig};
pub use params::{ActorCriticParams, FlatTensors, Gradients, Layout, NetConfig, TensorSpec};
pub use scalar::Scalar;

use crate::env::observation as ranges;
use crate::env::{Observation, EPISODE_LENGTH, OBS_DIM};

#[derive(Debug, Error)]
pub enum NetError {
    #[error("observation contains a non-finite value")]
    NonFiniteInput,
    #[error("forward trace does not belong to these parameters")]
    TraceMismatch,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("corrupt checkpoint: {0}")]
    CheckpointCorrupt(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Scales a raw observation into `[0, 1]`: positions by 1/9, ownership
/// codes by 1/2, steps remaining by 1/250. Lock flags and padding pass
/// through unchanged.
pub fn normalize_observation(raw: &Observation) -> [f32; OBS_DIM] {
    let mut out = raw.0;
    for v in &mut out[ranges::OWN_POS.start..ranges::OPP_POS.end] {
        *v /= 9.0;
    }
    for v in &mut out[ranges::OWNERSHIP] {
        *v /= 2.0;
    }
    out[ranges::STEPS_REMAINING] /= EPISODE_LENGTH as f32;
    out
}
