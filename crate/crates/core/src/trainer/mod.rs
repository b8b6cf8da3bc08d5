//! Decentralised self-play: Pink and Green each own a network and an Adam
//! optimiser and are updated with PPO after every episode.

mod config;
mod metrics;
mod policy;

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{Preset, TrainConfig};
pub use metrics::{parse_metrics, EpisodeMetrics, WinTracker, ROLLING_WINDOW};
pub use policy::{greedy_action, network_input, sample_from_input, score_action, select_action, ActionSample};

use crate::env::{determine_winner, determine_winner_by_returns, reset, step, Agent, EnvError, GameAction};
use crate::net::{init_params_indexed, ActorCriticParams, Adam, AgentCheckpoint, NetError};
use crate::ppo::{ppo_update, PpoError, Trajectory, UpdateStats};
use crate::rng::{stream_rng, Stream};

pub const METRICS_FILE: &str = "metrics.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const STATE_FILE: &str = "train_state.json";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot resume: {0}")]
    Resume(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Ppo(#[from] PpoError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// One agent's network and optimiser.
#[derive(Debug, Clone)]
pub struct Learner {
    pub params: ActorCriticParams<f32>,
    pub optimizer: Adam<f32>,
}

/// Written next to each checkpoint pair so a run can pick up where it
/// stopped.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainState {
    pub episode: u64,
    pub tracker: WinTracker,
    pub mixed_episodes: u64,
    pub pink_checkpoint: String,
    pub green_checkpoint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: TrainConfig,
    pub seed: u64,
    pub code_version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub preset: Preset,
    pub seed: u64,
    pub episodes: u64,
    pub pink_wins: u64,
    pub green_wins: u64,
    pub ties: u64,
    pub mixed_episodes: u64,
    pub wr_roll100: f64,
    pub wr_cum: f64,
    pub final_checkpoints: Option<[String; 2]>,
}

pub struct Trainer {
    config: TrainConfig,
    learners: [Learner; 2],
    tracker: WinTracker,
    episode: u64,
    mixed_episodes: u64,
    metrics: Option<BufWriter<File>>,
}

impl Trainer {
    /// A fresh run. When an output directory is configured it is created
    /// and any earlier metrics log in it is replaced.
    pub fn new(config: TrainConfig) -> Result<Self, TrainError> {
        config.validate().map_err(TrainError::Config)?;
        let learners = [0u64, 1].map(|i| {
            let params = init_params_indexed::<f32>(config.net.clone(), config.seed, i).expect("validated net config");
            let optimizer = Adam::for_params(config.adam, &params);
            Learner { params, optimizer }
        });
        let metrics = match &config.out_dir {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                write_json(&dir.join(MANIFEST_FILE), &manifest(&config))?;
                Some(BufWriter::new(File::create(dir.join(METRICS_FILE))?))
            }
            None => None,
        };
        Ok(Trainer {
            config,
            learners,
            tracker: WinTracker::default(),
            episode: 0,
            mixed_episodes: 0,
            metrics,
        })
    }

    /// Continues the run in `config.out_dir` from its latest checkpoint
    /// pair. Metrics logged after that checkpoint are discarded.
    pub fn resume(config: TrainConfig) -> Result<Self, TrainError> {
        config.validate().map_err(TrainError::Config)?;
        let dir = config
            .out_dir
            .clone()
            .ok_or_else(|| TrainError::Resume("no output directory configured".into()))?;
        let state: TrainState = serde_json::from_slice(&fs::read(dir.join(STATE_FILE))?)?;
        let load = |name: &str| -> Result<Learner, TrainError> {
            let ckpt = AgentCheckpoint::load(&dir.join(name))?;
            if ckpt.meta.net != config.net {
                return Err(TrainError::Resume(format!("{name} has a different network shape")));
            }
            let optimizer = ckpt
                .optimizer
                .ok_or_else(|| TrainError::Resume(format!("{name} carries no optimiser state")))?;
            Ok(Learner { params: ckpt.params, optimizer })
        };
        let learners = [load(&state.pink_checkpoint)?, load(&state.green_checkpoint)?];

        let metrics_path = dir.join(METRICS_FILE);
        truncate_lines(&metrics_path, state.episode)?;
        let file = OpenOptions::new().append(true).open(&metrics_path)?;
        write_json(&dir.join(MANIFEST_FILE), &manifest(&config))?;
        Ok(Trainer {
            config,
            learners,
            tracker: state.tracker,
            episode: state.episode,
            mixed_episodes: state.mixed_episodes,
            metrics: Some(BufWriter::new(file)),
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    /// Episodes completed so far.
    pub fn episode(&self) -> u64 {
        self.episode
    }

    pub fn learner(&self, agent: Agent) -> &Learner {
        &self.learners[agent.index()]
    }

    pub fn tracker(&self) -> &WinTracker {
        &self.tracker
    }

    /// Plays one self-play episode, updates both agents, and logs it.
    pub fn run_episode(&mut self) -> Result<EpisodeMetrics, TrainError> {
        let started = Instant::now();
        let ep_index = self.episode;
        let seed = self.config.seed;
        let mixed = self.config.opponent_random > 0.0
            && stream_rng(seed, Stream::OpponentMixing, ep_index).random_bool(self.config.opponent_random);
        let mut rng_pink = stream_rng(seed, Stream::PinkPolicy, ep_index);
        let mut rng_green = stream_rng(seed, Stream::GreenPolicy, ep_index);

        let env = &self.config.env;
        let norm = self.config.obs_norm;
        let steps = env.episode_length as usize;
        let mut traj = [Trajectory::with_capacity(steps), Trajectory::with_capacity(steps)];
        let (mut state, mut obs_pink, mut obs_green) = reset(env, false);
        loop {
            let x_pink = network_input(&obs_pink, norm);
            let x_green = network_input(&obs_green, norm);
            let s_pink = sample_from_input(&self.learners[0].params, &x_pink, &mut rng_pink)?;
            let s_green = if mixed {
                let a = rng_green.random_range(0..GameAction::COUNT);
                score_action(&self.learners[1].params, &x_green, a)?
            } else {
                sample_from_input(&self.learners[1].params, &x_green, &mut rng_green)?
            };
            let r = step(
                &mut state,
                env,
                GameAction::from_index(s_pink.action)?,
                GameAction::from_index(s_green.action)?,
            )?;
            traj[0].push(&x_pink, s_pink.action, s_pink.log_prob, s_pink.value, r.reward_pink, r.done);
            traj[1].push(&x_green, s_green.action, s_green.log_prob, s_green.value, r.reward_green, r.done);
            obs_pink = r.obs_pink;
            obs_green = r.obs_green;
            if r.done {
                break;
            }
        }

        let ret = [traj[0].total_reward(), traj[1].total_reward()];
        let winner = if self.config.reward_based_win {
            determine_winner_by_returns(ret[0], ret[1])
        } else {
            determine_winner(&state)?
        };

        let mut stats = [UpdateStats::default(); 2];
        for (i, learner) in self.learners.iter_mut().enumerate() {
            let adv = traj[i].advantages(&self.config.ppo)?;
            stats[i] = ppo_update(&mut learner.params, &mut learner.optimizer, &traj[i], &adv, &self.config.ppo)?;
        }

        self.episode += 1;
        self.mixed_episodes += mixed as u64;
        self.tracker.record(winner);
        let m = EpisodeMetrics {
            ep: self.episode,
            winner,
            ret_pink: ret[0],
            ret_green: ret[1],
            tiles_pink: state.tiles(Agent::Pink),
            tiles_green: state.tiles(Agent::Green),
            mixed,
            wr_roll100: self.tracker.rolling(),
            wr_cum: self.tracker.cumulative(),
            ent_pink: stats[0].entropy,
            ent_green: stats[1].entropy,
            ev_pink: stats[0].explained_variance,
            ev_green: stats[1].explained_variance,
            loss_pi_pink: stats[0].policy_loss,
            loss_v_pink: stats[0].value_loss,
            loss_pi_green: stats[1].policy_loss,
            loss_v_green: stats[1].value_loss,
            secs: self.config.log_wall_clock.then(|| started.elapsed().as_secs_f64()),
        };
        if let Some(w) = &mut self.metrics {
            serde_json::to_writer(&mut *w, &m)?;
            w.write_all(b"\n")?;
        }
        let interval = self.config.checkpoint_interval;
        if interval > 0 && self.episode % interval == 0 && self.config.out_dir.is_some() {
            self.save_checkpoints(&self.episode.to_string())?;
        }
        Ok(m)
    }

    /// Trains until `config.episodes` episodes have been played, then
    /// writes the final checkpoint pair and a summary.
    pub fn run(&mut self) -> Result<RunSummary, TrainError> {
        while self.episode < self.config.episodes {
            let m = self.run_episode()?;
            log::debug!("episode {} winner {:?} wr_roll100 {:.3}", m.ep, m.winner, m.wr_roll100);
        }
        let final_checkpoints = match self.config.out_dir {
            Some(_) => Some(self.save_checkpoints("final")?),
            None => None,
        };
        let summary = self.summary(final_checkpoints);
        if let Some(dir) = &self.config.out_dir {
            write_json(&dir.join(SUMMARY_FILE), &summary)?;
        }
        Ok(summary)
    }

    pub fn summary(&self, final_checkpoints: Option<[String; 2]>) -> RunSummary {
        RunSummary {
            preset: self.config.preset,
            seed: self.config.seed,
            episodes: self.episode,
            pink_wins: self.tracker.pink_wins,
            green_wins: self.tracker.green_wins,
            ties: self.tracker.ties,
            mixed_episodes: self.mixed_episodes,
            wr_roll100: self.tracker.rolling(),
            wr_cum: self.tracker.cumulative(),
            final_checkpoints,
        }
    }

    /// A checkpoint of one agent including its optimiser state.
    pub fn checkpoint(&self, agent: Agent) -> AgentCheckpoint {
        let l = &self.learners[agent.index()];
        let mut ckpt = AgentCheckpoint::new(l.params.clone(), self.config.obs_norm).with_optimizer(l.optimizer.clone());
        ckpt.meta.agent = Some(agent_name(agent).into());
        ckpt.meta.episode = self.episode;
        ckpt.meta.seed = Some(self.config.seed);
        ckpt.meta.preset = Some(self.config.preset.name().into());
        ckpt
    }

    /// Writes both agents' checkpoints labelled `label` and records them as
    /// the resume point. Returns the two file names.
    pub fn save_checkpoints(&mut self, label: &str) -> Result<[String; 2], TrainError> {
        let dir = self
            .config
            .out_dir
            .clone()
            .ok_or_else(|| TrainError::Config("no output directory configured".into()))?;
        if let Some(w) = &mut self.metrics {
            w.flush()?;
        }
        let names = Agent::BOTH.map(|a| checkpoint_file_name(a, self.config.preset, self.config.seed, label));
        for (agent, name) in Agent::BOTH.iter().zip(&names) {
            self.checkpoint(*agent).save(&dir.join(name))?;
        }
        let state = TrainState {
            episode: self.episode,
            tracker: self.tracker.clone(),
            mixed_episodes: self.mixed_episodes,
            pink_checkpoint: names[0].clone(),
            green_checkpoint: names[1].clone(),
        };
        write_json(&dir.join(STATE_FILE), &state)?;
        Ok(names)
    }
}

impl Drop for Trainer {
    fn drop(&mut self) {
        if let Some(w) = &mut self.metrics {
            let _ = w.flush();
        }
    }
}

/// Fresh run to completion.
pub fn train(config: TrainConfig) -> Result<RunSummary, TrainError> {
    Trainer::new(config)?.run()
}

pub fn agent_name(agent: Agent) -> &'static str {
    match agent {
        Agent::Pink => "pink",
        Agent::Green => "green",
    }
}

/// `{agent}_{tag}_checkpoint_seed{seed}_{label}.tpw`, e.g.
/// `pink_v3_checkpoint_seed42_12000.tpw`.
pub fn checkpoint_file_name(agent: Agent, preset: Preset, seed: u64, label: &str) -> String {
    format!("{}_{}_checkpoint_seed{seed}_{label}.tpw", agent_name(agent), preset.file_tag())
}

fn manifest(config: &TrainConfig) -> RunManifest {
    RunManifest {
        config: config.clone(),
        seed: config.seed,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), TrainError> {
    let tmp: PathBuf = path.with_extension("json.tmp");
    fs::write(&tmp, serde_json::to_vec_pretty(value)?)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Keeps the first `keep` lines of `path`.
fn truncate_lines(path: &Path, keep: u64) -> Result<(), TrainError> {
    let mut bytes = 0u64;
    let mut lines = 0u64;
    let mut reader = BufReader::new(File::open(path)?);
    let mut buf = Vec::new();
    while lines < keep {
        buf.clear();
        let n = reader.read_until(b'\n', &mut buf)?;
        if n == 0 {
            return Err(TrainError::Resume(format!("metrics log has only {lines} of {keep} episodes")));
        }
        bytes += n as u64;
        lines += 1;
    }
    OpenOptions::new().write(true).open(path)?.set_len(bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::NetConfig;

    fn tiny(seed: u64, episodes: u64) -> TrainConfig {
        TrainConfig {
            episodes,
            net: NetConfig::tiny(),
            checkpoint_interval: 0,
            ..TrainConfig::from_preset(Preset::V3Full, seed)
        }
    }

    #[test]
    fn checkpoint_names_follow_pattern() {
        assert_eq!(
            checkpoint_file_name(Agent::Pink, Preset::V3Full, 42, "12000"),
            "pink_v3_checkpoint_seed42_12000.tpw"
        );
        assert_eq!(
            checkpoint_file_name(Agent::Green, Preset::NoGae, 7, "final"),
            "green_no_gae_checkpoint_seed7_final.tpw"
        );
    }

    #[test]
    fn episodes_are_deterministic() {
        let run = || {
            let mut t = Trainer::new(tiny(5, 3)).unwrap();
            (0..3).map(|_| t.run_episode().unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn first_episode_entropy_is_near_uniform() {
        let mut t = Trainer::new(tiny(1, 1)).unwrap();
        let m = t.run_episode().unwrap();
        assert!((m.ent_pink - 5f64.ln()).abs() < 0.01, "{}", m.ent_pink);
        assert!((m.ent_green - 5f64.ln()).abs() < 0.01);
        assert_eq!(m.ep, 1);
    }

    #[test]
    fn agents_start_from_different_weights() {
        let t = Trainer::new(tiny(1, 1)).unwrap();
        assert_ne!(
            t.learner(Agent::Pink).params.as_slice(),
            t.learner(Agent::Green).params.as_slice()
        );
    }

    #[test]
    fn mixing_rate_is_respected() {
        let mut c = tiny(3, 0);
        c.opponent_random = 0.2;
        let hits = (0..2_000u64)
            .filter(|i| stream_rng(c.seed, Stream::OpponentMixing, *i).random_bool(c.opponent_random))
            .count();
        assert!((hits as f64 / 2_000.0 - 0.2).abs() < 0.03);
    }

    #[test]
    fn invalid_config_rejected() {
        let mut c = tiny(1, 1);
        c.opponent_random = 1.5;
        assert!(matches!(Trainer::new(c), Err(TrainError::Config(_))));
    }

    #[test]
    fn resume_without_state_fails() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = tiny(1, 1);
        c.out_dir = Some(dir.path().to_path_buf());
        assert!(Trainer::resume(c).is_err());
    }

    #[test]
    fn truncate_keeps_prefix() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.jsonl");
        fs::write(&p, "a\nbb\nccc\n").unwrap();
        truncate_lines(&p, 2).unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "a\nbb\n");
        assert!(truncate_lines(&p, 5).is_err());
    }
}
