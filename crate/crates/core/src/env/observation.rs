use super::{Agent, EnvState, Owner, NUM_TILES};

/// Length of the per-agent observation vector.
pub const OBS_DIM: usize = 206;

pub const OWN_POS: std::ops::Range<usize> = 0..2;
pub const OPP_POS: std::ops::Range<usize> = 2..4;
pub const OWNERSHIP: std::ops::Range<usize> = 4..4 + NUM_TILES;
pub const LOCKS: std::ops::Range<usize> = 4 + NUM_TILES..4 + 2 * NUM_TILES;
pub const STEPS_REMAINING: usize = 204;
pub const PADDING: usize = 205;

/// Raw egocentric observation.
///
/// Layout: own `(x, z)`, opponent `(x, z)`, 100 ownership codes
/// (0 neutral, 1 own, 2 opponent), 100 lock flags, steps remaining, one
/// padding zero. Tiles are flattened row-major (`z * 10 + x`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation(pub [f32; OBS_DIM]);

impl Observation {
    pub fn as_slice(&self) -> &[f32] {
        &self.0
    }
}

impl std::ops::Deref for Observation {
    type Target = [f32; OBS_DIM];

    fn deref(&self) -> &Self::Target {
        &self.0
    }
}

pub fn encode_observation(state: &EnvState, agent: Agent) -> Observation {
    let mut obs = [0f32; OBS_DIM];
    let own = state.position(agent);
    let opp = state.position(agent.opponent());
    obs[0] = own.x as f32;
    obs[1] = own.z as f32;
    obs[2] = opp.x as f32;
    obs[3] = opp.z as f32;
    let me = Owner::from(agent);
    for (i, tile) in state.board.tiles().iter().enumerate() {
        obs[OWNERSHIP.start + i] = match tile.owner {
            Owner::Neutral => 0.0,
            o if o == me => 1.0,
            _ => 2.0,
        };
        obs[LOCKS.start + i] = if tile.locked { 1.0 } else { 0.0 };
    }
    obs[STEPS_REMAINING] = state.steps_remaining() as f32;
    obs[PADDING] = 0.0;
    Observation(obs)
}
