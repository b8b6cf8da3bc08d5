//! Frozen-policy evaluation against a uniformly random opponent, the
//! random-vs-random fairness check, and summary statistics.

mod stats;

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use stats::{mean, one_sample_t, pearson_r, sample_std, wilson_interval, StatsError, WilsonInterval, Z_95};

use crate::env::{determine_winner, reset, step, Agent, EnvConfig, EnvError, EnvState, GameAction, Observation, Outcome, Owner, Pos, GRID_SIZE};
use crate::net::{ActorCriticParams, AgentCheckpoint, NetError};
use crate::rng::{stream_rng, Stream, StreamRng};
use crate::trainer::{greedy_action, select_action};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Something that picks an action each step.
pub trait Player {
    fn act(&self, state: &EnvState, me: Agent, obs: &Observation, rng: &mut StreamRng) -> Result<GameAction, EvalError>;
}

/// Uniformly random over the five actions.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomPlayer;

impl Player for RandomPlayer {
    fn act(&self, _: &EnvState, _: Agent, _: &Observation, rng: &mut StreamRng) -> Result<GameAction, EvalError> {
        Ok(GameAction::ALL[rng.random_range(0..GameAction::COUNT)])
    }
}

/// A trained network, sampling from its policy or taking the argmax.
#[derive(Debug, Clone, Copy)]
pub struct PolicyPlayer<'a> {
    pub params: &'a ActorCriticParams<f32>,
    pub obs_norm: bool,
    pub greedy: bool,
}

impl Player for PolicyPlayer<'_> {
    fn act(&self, _: &EnvState, _: Agent, obs: &Observation, rng: &mut StreamRng) -> Result<GameAction, EvalError> {
        let a = if self.greedy {
            greedy_action(self.params, obs, self.obs_norm)?
        } else {
            select_action(self.params, obs, self.obs_norm, rng)?.action
        };
        Ok(GameAction::from_index(a)?)
    }
}

/// Scripted heuristic: step towards the nearest tile it could repaint,
/// breaking ties at random. Never locks.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyPainter;

impl Player for GreedyPainter {
    fn act(&self, state: &EnvState, me: Agent, _: &Observation, rng: &mut StreamRng) -> Result<GameAction, EvalError> {
        let here = state.position(me);
        let mine = Owner::from(me);
        let paintable = |p: Pos| {
            let t = state.board.tile(p);
            t.owner != mine && !t.locked
        };
        let targets: Vec<Pos> = (0..GRID_SIZE * GRID_SIZE).map(Pos::from_index).filter(|p| *p != here && paintable(*p)).collect();
        let dist = |a: Pos, b: Pos| (a.x as i32 - b.x as i32).abs() + (a.z as i32 - b.z as i32).abs();
        let Some(nearest) = targets.iter().map(|t| dist(here, *t)).min() else {
            return Ok(GameAction::ALL[rng.random_range(0..4)]);
        };
        let moves: Vec<GameAction> = GameAction::ALL[..4]
            .iter()
            .copied()
            .filter(|m| {
                let next = m.apply(here);
                next != here && targets.iter().any(|t| dist(next, *t) == nearest - 1)
            })
            .collect();
        Ok(moves[rng.random_range(0..moves.len())])
    }
}

/// Final state of one game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameRecord {
    pub outcome: Outcome,
    pub tiles_pink: u32,
    pub tiles_green: u32,
    pub return_pink: f64,
    pub return_green: f64,
}

/// Plays one full episode between two players.
pub fn play_game(
    env: &EnvConfig,
    pink: &dyn Player,
    green: &dyn Player,
    swap_starts: bool,
    rng_pink: &mut StreamRng,
    rng_green: &mut StreamRng,
) -> Result<GameRecord, EvalError> {
    let (mut state, mut obs_pink, mut obs_green) = reset(env, swap_starts);
    let mut ret = [0.0; 2];
    while !state.done {
        let a_pink = pink.act(&state, Agent::Pink, &obs_pink, rng_pink)?;
        let a_green = green.act(&state, Agent::Green, &obs_green, rng_green)?;
        let r = step(&mut state, env, a_pink, a_green)?;
        ret[0] += r.reward_pink;
        ret[1] += r.reward_green;
        obs_pink = r.obs_pink;
        obs_green = r.obs_green;
    }
    Ok(GameRecord {
        outcome: determine_winner(&state)?,
        tiles_pink: state.tiles(Agent::Pink),
        tiles_green: state.tiles(Agent::Green),
        return_pink: ret[0],
        return_green: ret[1],
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalOptions {
    /// Take the most probable action instead of sampling.
    pub greedy: bool,
    /// Evaluated agent starts on Green's usual tile.
    pub swap_starts: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub games: u64,
    pub wins: u64,
    pub losses: u64,
    pub ties: u64,
    pub win_rate: f64,
    pub wilson: WilsonInterval,
    pub base_seed: u64,
    /// Seed of game `i` is `base_seed + i`.
    pub seeds: Vec<u64>,
    /// SHA-256 of the serialized checkpoint, hex.
    pub checkpoint_id: String,
    pub options: EvalOptions,
}

/// Plays `player` as Pink against [`RandomPlayer`] for `games` games.
pub fn evaluate_player_vs_random(
    player: &dyn Player,
    env: &EnvConfig,
    games: u64,
    base_seed: u64,
    swap_starts: bool,
) -> Result<EvalReport, EvalError> {
    if games == 0 {
        return Err(StatsError::Domain("no games".into()).into());
    }
    let mut wins = 0;
    let mut losses = 0;
    let mut ties = 0;
    let seeds: Vec<u64> = (0..games).map(|i| base_seed.wrapping_add(i)).collect();
    for &seed in &seeds {
        let mut rng_me = stream_rng(seed, Stream::Evaluation, 0);
        let mut rng_opp = stream_rng(seed, Stream::Evaluation, 1);
        match play_game(env, player, &RandomPlayer, swap_starts, &mut rng_me, &mut rng_opp)?.outcome {
            Outcome::Pink => wins += 1,
            Outcome::Green => losses += 1,
            Outcome::Tie => ties += 1,
        }
    }
    Ok(EvalReport {
        games,
        wins,
        losses,
        ties,
        win_rate: wins as f64 / games as f64,
        wilson: wilson_interval(wins, games, Z_95)?,
        base_seed,
        seeds,
        checkpoint_id: String::new(),
        options: EvalOptions { greedy: false, swap_starts },
    })
}

/// Evaluates a loaded checkpoint; no parameters are modified.
pub fn evaluate_vs_random(ckpt: &AgentCheckpoint, games: u64, base_seed: u64, options: EvalOptions) -> Result<EvalReport, EvalError> {
    let player = PolicyPlayer {
        params: &ckpt.params,
        obs_norm: ckpt.meta.obs_norm,
        greedy: options.greedy,
    };
    let mut report = evaluate_player_vs_random(&player, &EnvConfig::default(), games, base_seed, options.swap_starts)?;
    report.options = options;
    report.checkpoint_id = sha256_hex(&ckpt.to_bytes());
    Ok(report)
}

/// Loads a checkpoint file and evaluates it; the id is the hash of the
/// file's bytes.
pub fn evaluate_checkpoint_file(path: &Path, games: u64, base_seed: u64, options: EvalOptions) -> Result<EvalReport, EvalError> {
    let bytes = std::fs::read(path)?;
    let ckpt = AgentCheckpoint::from_bytes(&bytes)?;
    let mut report = evaluate_vs_random(&ckpt, games, base_seed, options)?;
    report.checkpoint_id = sha256_hex(&bytes);
    Ok(report)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SideStats {
    pub games: u64,
    pub pink_wins: u64,
    pub green_wins: u64,
    pub ties: u64,
    pub pink_wr: f64,
    pub green_wr: f64,
    pub tie_rate: f64,
}

impl SideStats {
    fn record(&mut self, o: Outcome) {
        self.games += 1;
        match o {
            Outcome::Pink => self.pink_wins += 1,
            Outcome::Green => self.green_wins += 1,
            Outcome::Tie => self.ties += 1,
        }
        let n = self.games as f64;
        self.pink_wr = self.pink_wins as f64 / n;
        self.green_wr = self.green_wins as f64 / n;
        self.tie_rate = self.ties as f64 / n;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub standard: SideStats,
    /// Same number of games with the starting tiles exchanged.
    pub swapped: SideStats,
}

/// Random-vs-random games from the standard and the swapped starts.
pub fn fairness_check(games: u64, seed: u64) -> Result<FairnessReport, EvalError> {
    let env = EnvConfig::default();
    let mut standard = SideStats::default();
    let mut swapped = SideStats::default();
    for i in 0..games {
        for (swap, stats) in [(false, &mut standard), (true, &mut swapped)] {
            let index = if swap { i | 1 << 63 } else { i };
            let mut rng = stream_rng(seed, Stream::Fairness, index);
            let (a, b) = random_action_sequences(&mut rng, env.episode_length as usize);
            stats.record(replay(&env, &a, &b, swap)?.outcome);
        }
    }
    Ok(FairnessReport { standard, swapped })
}

/// Two independent uniformly random action sequences.
pub fn random_action_sequences(rng: &mut StreamRng, len: usize) -> (Vec<GameAction>, Vec<GameAction>) {
    let mut draw = || (0..len).map(|_| GameAction::ALL[rng.random_range(0..GameAction::COUNT)]).collect::<Vec<_>>();
    let a = draw();
    let b = draw();
    (a, b)
}

/// Plays fixed action sequences from the given starts.
pub fn replay(env: &EnvConfig, pink: &[GameAction], green: &[GameAction], swap_starts: bool) -> Result<GameRecord, EvalError> {
    let (mut state, _, _) = reset(env, swap_starts);
    let mut ret = [0.0; 2];
    for (a, b) in pink.iter().zip(green) {
        if state.done {
            break;
        }
        let r = step(&mut state, env, *a, *b)?;
        ret[0] += r.reward_pink;
        ret[1] += r.reward_green;
    }
    Ok(GameRecord {
        outcome: determine_winner(&state)?,
        tiles_pink: state.tiles(Agent::Pink),
        tiles_green: state.tiles(Agent::Green),
        return_pink: ret[0],
        return_green: ret[1],
    })
}

/// Number of seeded games where exchanging the colours fails to exchange
/// the result exactly. Each game is checked two ways: swapping the start
/// tiles and action sequences, and reflecting every action through the
/// board centre while exchanging sequences.
pub fn swap_equivariance_violations(games: u64, seed: u64) -> Result<u64, EvalError> {
    let env = EnvConfig::default();
    let mut violations = 0;
    for i in 0..games {
        let mut rng = stream_rng(seed, Stream::Fairness, i);
        let (a, b) = random_action_sequences(&mut rng, env.episode_length as usize);
        let base = replay(&env, &a, &b, false)?;
        let relabelled = replay(&env, &b, &a, true)?;
        let mirror = |s: &[GameAction]| s.iter().map(|x| x.mirrored()).collect::<Vec<_>>();
        let reflected = replay(&env, &mirror(&b), &mirror(&a), false)?;
        for other in [relabelled, reflected] {
            let ok = other.outcome == base.outcome.swapped()
                && other.tiles_pink == base.tiles_green
                && other.tiles_green == base.tiles_pink
                && other.return_pink == base.return_green
                && other.return_green == base.return_pink;
            violations += !ok as u64;
        }
    }
    Ok(violations)
}
