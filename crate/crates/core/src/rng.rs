//! Named, seeded random streams.
//!
//! Every stream is a ChaCha8 generator keyed by `(master seed, stream tag,
//! index)`. The index is usually an episode or game number, so a run can be
//! resumed at any episode without replaying earlier draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stream {
    PinkPolicy,
    GreenPolicy,
    OpponentMixing,
    Evaluation,
    Fairness,
    /// Parameter initialisation; index 0 is Pink, 1 is Green.
    Init,
}

impl Stream {
    pub fn tag(self) -> u64 {
        match self {
            Stream::PinkPolicy => 0x7069_6e6b, // "pink"
            Stream::GreenPolicy => 0x6772_6565, // "gree"
            Stream::OpponentMixing => 0x6d69_7869, // "mixi"
            Stream::Evaluation => 0x6576_616c, // "eval"
            Stream::Fairness => 0x6661_6972, // "fair"
            Stream::Init => 0x696e_6974, // "init"
        }
    }
}

/// Builds the generator for `stream` at `index` under `master`.
pub fn stream_rng(master: u64, stream: Stream, index: u64) -> StreamRng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&master.to_le_bytes());
    key[8..16].copy_from_slice(&stream.tag().to_le_bytes());
    key[16..24].copy_from_slice(&index.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}
