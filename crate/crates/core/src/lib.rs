//! Territory Paint Wars: a competitive two-agent grid game together with a
//! decentralised PPO self-play trainer, an evaluation harness, and a TCP
//! bridge speaking newline-delimited JSON.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod bridge;
pub mod cli;
pub mod env;
pub mod eval;
pub mod net;
pub mod ppo;
pub mod rng;
pub mod trainer;
