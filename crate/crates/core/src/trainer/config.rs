use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::env::EnvConfig;
use crate::net::{AdamConfig, NetConfig};
use crate::ppo::PpoHyperparams;

/// Named ablation configurations. Each preset starts from the full
/// configuration and flips a fixed set of switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    V3Full,
    NoTerminal,
    NoGae,
    NoObsNorm,
    NoMixing,
    V1AllBugs,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::V3Full,
        Preset::NoTerminal,
        Preset::NoGae,
        Preset::NoObsNorm,
        Preset::NoMixing,
        Preset::V1AllBugs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::V3Full => "v3_full",
            Preset::NoTerminal => "no_terminal",
            Preset::NoGae => "no_gae",
            Preset::NoObsNorm => "no_obs_norm",
            Preset::NoMixing => "no_mixing",
            Preset::V1AllBugs => "v1_all_bugs",
        }
    }

    /// Short tag used in checkpoint file names.
    pub fn file_tag(self) -> &'static str {
        match self {
            Preset::V3Full => "v3",
            other => other.name(),
        }
    }

    /// Human-readable list of the switches this preset changes.
    pub fn flag_expansion(self) -> &'static str {
        match self {
            Preset::V3Full => "lambda=0.95, terminal reward on, obs normalisation on, opponent-random=0.2, lock bonus per new lock, winner by tile count",
            Preset::NoTerminal => "v3_full + terminal reward off",
            Preset::NoGae => "v3_full + lambda=1.0 (Monte-Carlo returns)",
            Preset::NoObsNorm => "v3_full + obs normalisation off",
            Preset::NoMixing => "v3_full + opponent-random=0.0",
            Preset::V1AllBugs => {
                "cumulative lock bonus (0.05 x total locks per step), terminal reward off, lambda=1.0, \
                 obs normalisation off, winner by episode return, opponent-random=0.0"
            }
        }
    }

    fn apply(self, c: &mut TrainConfig) {
        match self {
            Preset::V3Full => {}
            Preset::NoTerminal => c.env.bugs.no_terminal_reward = true,
            Preset::NoGae => c.ppo.lambda = 1.0,
            Preset::NoObsNorm => c.obs_norm = false,
            Preset::NoMixing => c.opponent_random = 0.0,
            Preset::V1AllBugs => {
                c.env.bugs.cumulative_lock_bonus = true;
                c.env.bugs.no_terminal_reward = true;
                c.ppo.lambda = 1.0;
                c.obs_norm = false;
                c.reward_based_win = true;
                c.opponent_random = 0.0;
            }
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown preset `{s}`"))
    }
}

/// Everything needed to reproduce a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub seed: u64,
    pub episodes: u64,
    /// Write a checkpoint pair every this many episodes (0 disables).
    pub checkpoint_interval: u64,
    /// Probability that Green plays uniformly at random for a whole episode.
    pub opponent_random: f64,
    pub preset: Preset,
    pub env: EnvConfig,
    pub ppo: PpoHyperparams,
    pub adam: AdamConfig,
    pub net: NetConfig,
    pub obs_norm: bool,
    /// Decide the logged winner by comparing episode returns instead of tiles.
    pub reward_based_win: bool,
    /// Add per-episode wall-clock seconds to the metrics (breaks byte-level
    /// reproducibility of the log).
    pub log_wall_clock: bool,
    /// No files are written when absent.
    pub out_dir: Option<PathBuf>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            seed: 42,
            episodes: 12_000,
            checkpoint_interval: 1_000,
            opponent_random: 0.2,
            preset: Preset::V3Full,
            env: EnvConfig::default(),
            ppo: PpoHyperparams::default(),
            adam: AdamConfig::default(),
            net: NetConfig::default(),
            obs_norm: true,
            reward_based_win: false,
            log_wall_clock: false,
            out_dir: None,
        }
    }
}

impl TrainConfig {
    pub fn from_preset(preset: Preset, seed: u64) -> Self {
        let mut c = TrainConfig {
            seed,
            preset,
            ..TrainConfig::default()
        };
        preset.apply(&mut c);
        c
    }

    pub fn validate(&self) -> Result<(), String> {
        self.env.validate().map_err(|e| e.to_string())?;
        self.net.validate().map_err(|e| e.to_string())?;
        if !(0.0..=1.0).contains(&self.opponent_random) {
            return Err(format!("opponent-random must lie in [0, 1], got {}", self.opponent_random));
        }
        if !(0.0..=1.0).contains(&self.ppo.lambda) || !(0.0..=1.0).contains(&self.ppo.gamma) {
            return Err("gamma and lambda must lie in [0, 1]".into());
        }
        if self.ppo.epochs == 0 {
            return Err("at least one PPO epoch is required".into());
        }
        Ok(())
    }
}
