//! The Territory Paint Wars game engine.
//!
//! Two agents move simultaneously on a 10×10 board, painting the tile they
//! stand on and optionally locking owned tiles so they can never be
//! repainted. After a fixed number of steps the agent owning more tiles wins.
//!
//! Conventions used throughout:
//! - North is `z + 1`, South `z − 1`, East `x + 1`, West `x − 1`.
//! - Moves that would leave the board are no-ops.
//! - When both agents stand on the same tile nothing is painted that step.
//! - Each agent's starting tile is painted at reset.

mod board;
pub mod observation;
mod reward;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use board::{Agent, Board, Owner, Pos, TileState, GRID_SIZE, NUM_TILES};
pub use observation::{encode_observation, Observation, OBS_DIM};
pub use reward::compute_reward;

/// Default number of steps per episode.
pub const EPISODE_LENGTH: u32 = 250;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnvError {
    #[error("step called on a finished episode")]
    StepAfterDone,
    #[error("episode is not finished yet")]
    NotDone,
    #[error("invalid action index {0}")]
    InvalidAction(i64),
    #[error("invalid environment config: {0}")]
    InvalidConfig(String),
}

/// The five discrete actions, indexed 0–4 in policy-head order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GameAction {
    North,
    South,
    East,
    West,
    Lock,
}

impl GameAction {
    pub const COUNT: usize = 5;
    pub const ALL: [GameAction; 5] = [
        GameAction::North,
        GameAction::South,
        GameAction::East,
        GameAction::West,
        GameAction::Lock,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Result<Self, EnvError> {
        Self::ALL
            .get(index)
            .copied()
            .ok_or(EnvError::InvalidAction(index as i64))
    }

    /// The action mirrored through the board centre (N↔S, E↔W).
    pub fn mirrored(self) -> Self {
        match self {
            GameAction::North => GameAction::South,
            GameAction::South => GameAction::North,
            GameAction::East => GameAction::West,
            GameAction::West => GameAction::East,
            GameAction::Lock => GameAction::Lock,
        }
    }

    /// Where an agent at `pos` ends up; moves off the grid leave it in place.
    pub fn apply(self, pos: Pos) -> Pos {
        let max = (GRID_SIZE - 1) as u8;
        match self {
            GameAction::North if pos.z < max => Pos::new(pos.x, pos.z + 1),
            GameAction::South if pos.z > 0 => Pos::new(pos.x, pos.z - 1),
            GameAction::East if pos.x < max => Pos::new(pos.x + 1, pos.z),
            GameAction::West if pos.x > 0 => Pos::new(pos.x - 1, pos.z),
            _ => pos,
        }
    }
}

/// Switches that re-introduce the reward bugs of the original baseline.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RewardBugs {
    /// Pay `cumulative_lock_coeff × total_locks` every step instead of a
    /// one-off bonus per new lock.
    pub cumulative_lock_bonus: bool,
    /// Drop the terminal win/loss term.
    pub no_terminal_reward: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub grid_size: usize,
    pub episode_length: u32,
    pub start_pink: Pos,
    pub start_green: Pos,
    pub tile_gain_coeff: f64,
    pub lock_bonus_coeff: f64,
    pub terminal_magnitude: f64,
    pub cumulative_lock_coeff: f64,
    pub bugs: RewardBugs,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            grid_size: GRID_SIZE,
            episode_length: EPISODE_LENGTH,
            start_pink: Pos::new(3, 3),
            start_green: Pos::new(6, 6),
            tile_gain_coeff: 0.1,
            lock_bonus_coeff: 0.5,
            terminal_magnitude: 1.0,
            cumulative_lock_coeff: 0.05,
            bugs: RewardBugs::default(),
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        if self.grid_size != GRID_SIZE {
            return Err(EnvError::InvalidConfig(format!(
                "grid_size must be {GRID_SIZE}, got {}",
                self.grid_size
            )));
        }
        if self.episode_length == 0 {
            return Err(EnvError::InvalidConfig("episode_length must be positive".into()));
        }
        for p in [self.start_pink, self.start_green] {
            if p.x as usize >= GRID_SIZE || p.z as usize >= GRID_SIZE {
                return Err(EnvError::InvalidConfig(format!("start {p:?} is off the board")));
            }
        }
        if self.start_pink == self.start_green {
            return Err(EnvError::InvalidConfig("start positions coincide".into()));
        }
        Ok(())
    }
}

/// Complete mutable game state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EnvState {
    pub board: Board,
    /// Indexed by [`Agent::index`].
    pub pos: [Pos; 2],
    pub step: u32,
    pub episode_length: u32,
    pub locks_total: [u32; 2],
    pub tiles_owned: [u32; 2],
    pub done: bool,
}

impl EnvState {
    pub fn position(&self, agent: Agent) -> Pos {
        self.pos[agent.index()]
    }

    pub fn tiles(&self, agent: Agent) -> u32 {
        self.tiles_owned[agent.index()]
    }

    pub fn locks(&self, agent: Agent) -> u32 {
        self.locks_total[agent.index()]
    }

    pub fn steps_remaining(&self) -> u32 {
        self.episode_length - self.step
    }

    pub fn neutral_tiles(&self) -> u32 {
        NUM_TILES as u32 - self.tiles_owned[0] - self.tiles_owned[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepInfo {
    pub tiles_pink: u32,
    pub tiles_green: u32,
    pub new_locks_pink: u32,
    pub new_locks_green: u32,
}

#[derive(Debug, Clone)]
pub struct StepResult {
    pub obs_pink: Observation,
    pub obs_green: Observation,
    pub reward_pink: f64,
    pub reward_green: f64,
    pub done: bool,
    pub info: StepInfo,
}

impl StepResult {
    pub fn obs(&self, agent: Agent) -> &Observation {
        match agent {
            Agent::Pink => &self.obs_pink,
            Agent::Green => &self.obs_green,
        }
    }

    pub fn reward(&self, agent: Agent) -> f64 {
        match agent {
            Agent::Pink => self.reward_pink,
            Agent::Green => self.reward_green,
        }
    }
}

/// Final outcome of an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pink,
    Green,
    Tie,
}

impl Outcome {
    pub fn winner(self) -> Option<Agent> {
        match self {
            Outcome::Pink => Some(Agent::Pink),
            Outcome::Green => Some(Agent::Green),
            Outcome::Tie => None,
        }
    }

    pub fn is_win_for(self, agent: Agent) -> bool {
        self.winner() == Some(agent)
    }

    /// The same result with colours exchanged.
    pub fn swapped(self) -> Self {
        match self {
            Outcome::Pink => Outcome::Green,
            Outcome::Green => Outcome::Pink,
            Outcome::Tie => Outcome::Tie,
        }
    }

    fn from_scores<T: PartialOrd>(pink: T, green: T) -> Self {
        if pink > green {
            Outcome::Pink
        } else if green > pink {
            Outcome::Green
        } else {
            Outcome::Tie
        }
    }
}

/// Winner by owned-tile count.
pub fn determine_winner(state: &EnvState) -> Result<Outcome, EnvError> {
    if !state.done {
        return Err(EnvError::NotDone);
    }
    Ok(Outcome::from_scores(state.tiles_owned[0], state.tiles_owned[1]))
}

/// Winner by cumulative episode reward. This reproduces the faulty win
/// detection of the original baseline and exists only for ablations.
pub fn determine_winner_by_returns(return_pink: f64, return_green: f64) -> Outcome {
    Outcome::from_scores(return_pink, return_green)
}

/// Starts a fresh episode. With `swap_starts` the two agents exchange
/// their starting tiles.
pub fn reset(config: &EnvConfig, swap_starts: bool) -> (EnvState, Observation, Observation) {
    let (start_pink, start_green) = if swap_starts {
        (config.start_green, config.start_pink)
    } else {
        (config.start_pink, config.start_green)
    };
    let mut board = Board::default();
    board.paint(start_pink, Agent::Pink);
    board.paint(start_green, Agent::Green);
    let state = EnvState {
        board,
        pos: [start_pink, start_green],
        step: 0,
        episode_length: config.episode_length,
        locks_total: [0, 0],
        tiles_owned: [1, 1],
        done: false,
    };
    let obs_pink = encode_observation(&state, Agent::Pink);
    let obs_green = encode_observation(&state, Agent::Green);
    (state, obs_pink, obs_green)
}

/// Advances the game by one simultaneous move.
pub fn step(
    state: &mut EnvState,
    config: &EnvConfig,
    action_pink: GameAction,
    action_green: GameAction,
) -> Result<StepResult, EnvError> {
    if state.done {
        return Err(EnvError::StepAfterDone);
    }
    let pre = state.clone();
    let actions = [action_pink, action_green];

    for agent in Agent::BOTH {
        let i = agent.index();
        state.pos[i] = actions[i].apply(state.pos[i]);
    }

    let co_occupied = state.pos[0] == state.pos[1];
    if !co_occupied {
        for agent in Agent::BOTH {
            state.board.paint(state.pos[agent.index()], agent);
        }
    }

    let mut new_locks = [0u32; 2];
    for agent in Agent::BOTH {
        let i = agent.index();
        if actions[i] == GameAction::Lock && state.board.lock(state.pos[i], agent) {
            new_locks[i] = 1;
            state.locks_total[i] += 1;
        }
    }

    state.tiles_owned = [
        state.board.count_owned(Owner::Pink) as u32,
        state.board.count_owned(Owner::Green) as u32,
    ];
    state.step += 1;
    state.done = state.step >= state.episode_length;

    let reward_pink = compute_reward(&pre, state, Agent::Pink, config);
    let reward_green = compute_reward(&pre, state, Agent::Green, config);

    Ok(StepResult {
        obs_pink: encode_observation(state, Agent::Pink),
        obs_green: encode_observation(state, Agent::Green),
        reward_pink,
        reward_green,
        done: state.done,
        info: StepInfo {
            tiles_pink: state.tiles_owned[0],
            tiles_green: state.tiles_owned[1],
            new_locks_pink: new_locks[0],
            new_locks_green: new_locks[1],
        },
    })
}

/// Owns a config and the current state; convenience wrapper over
/// [`reset`] and [`step`].
#[derive(Debug, Clone)]
pub struct Game {
    config: EnvConfig,
    state: EnvState,
}

impl Game {
    pub fn new(config: EnvConfig) -> Result<Self, EnvError> {
        config.validate()?;
        let (state, _, _) = reset(&config, false);
        Ok(Game { config, state })
    }

    pub fn reset(&mut self, swap_starts: bool) -> (Observation, Observation) {
        let (state, obs_pink, obs_green) = reset(&self.config, swap_starts);
        self.state = state;
        (obs_pink, obs_green)
    }

    pub fn step(&mut self, pink: GameAction, green: GameAction) -> Result<StepResult, EnvError> {
        step(&mut self.state, &self.config, pink, green)
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn observe(&self, agent: Agent) -> Observation {
        encode_observation(&self.state, agent)
    }

    pub fn winner(&self) -> Result<Outcome, EnvError> {
        determine_winner(&self.state)
    }
}
