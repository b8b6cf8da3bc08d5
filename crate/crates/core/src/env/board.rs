use serde::{Deserialize, Serialize};

/// Side length of the square board.
pub const GRID_SIZE: usize = 10;
/// Number of tiles on the board.
pub const NUM_TILES: usize = GRID_SIZE * GRID_SIZE;

/// One of the two players.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Agent {
    Pink,
    Green,
}

impl Agent {
    pub const BOTH: [Agent; 2] = [Agent::Pink, Agent::Green];

    pub fn index(self) -> usize {
        match self {
            Agent::Pink => 0,
            Agent::Green => 1,
        }
    }

    pub fn opponent(self) -> Agent {
        match self {
            Agent::Pink => Agent::Green,
            Agent::Green => Agent::Pink,
        }
    }
}

/// Ownership of a single tile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Owner {
    #[default]
    Neutral,
    Pink,
    Green,
}

impl From<Agent> for Owner {
    fn from(agent: Agent) -> Self {
        match agent {
            Agent::Pink => Owner::Pink,
            Agent::Green => Owner::Green,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct TileState {
    pub owner: Owner,
    /// Only ever set on an owned tile; a locked tile never changes owner.
    pub locked: bool,
}

/// Grid position. `x` grows to the east, `z` grows to the north.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pos {
    pub x: u8,
    pub z: u8,
}

impl Pos {
    pub const fn new(x: u8, z: u8) -> Self {
        Pos { x, z }
    }

    /// Row-major index, `z * GRID_SIZE + x`.
    pub fn index(self) -> usize {
        self.z as usize * GRID_SIZE + self.x as usize
    }

    pub fn from_index(index: usize) -> Self {
        Pos::new((index % GRID_SIZE) as u8, (index / GRID_SIZE) as u8)
    }

    /// Euclidean distance from the geometric centre of the board.
    pub fn distance_from_centre(self) -> f64 {
        let c = (GRID_SIZE as f64 - 1.0) / 2.0;
        let dx = self.x as f64 - c;
        let dz = self.z as f64 - c;
        (dx * dx + dz * dz).sqrt()
    }
}

/// The 10×10 tile grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Board {
    tiles: [TileState; NUM_TILES],
}

impl Default for Board {
    fn default() -> Self {
        Board {
            tiles: [TileState::default(); NUM_TILES],
        }
    }
}

impl Board {
    pub fn tile(&self, pos: Pos) -> TileState {
        self.tiles[pos.index()]
    }

    pub fn tiles(&self) -> &[TileState; NUM_TILES] {
        &self.tiles
    }

    pub(crate) fn tile_mut(&mut self, pos: Pos) -> &mut TileState {
        &mut self.tiles[pos.index()]
    }

    pub fn count_owned(&self, owner: Owner) -> usize {
        self.tiles.iter().filter(|t| t.owner == owner).count()
    }

    pub fn count_locked(&self) -> usize {
        self.tiles.iter().filter(|t| t.locked).count()
    }

    /// Claims `pos` for `agent` unless the tile is locked. Returns whether
    /// ownership changed.
    pub(crate) fn paint(&mut self, pos: Pos, agent: Agent) -> bool {
        let tile = self.tile_mut(pos);
        let owner = Owner::from(agent);
        if tile.locked || tile.owner == owner {
            return false;
        }
        tile.owner = owner;
        true
    }

    /// Locks `pos` if `agent` owns it and it is not yet locked. Returns
    /// whether a new lock was placed.
    pub(crate) fn lock(&mut self, pos: Pos, agent: Agent) -> bool {
        let tile = self.tile_mut(pos);
        if tile.locked || tile.owner != Owner::from(agent) {
            return false;
        }
        tile.locked = true;
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        for i in 0..NUM_TILES {
            assert_eq!(Pos::from_index(i).index(), i);
        }
        assert_eq!(Pos::new(3, 0).index(), 3);
        assert_eq!(Pos::new(0, 1).index(), 10);
    }

    #[test]
    fn locked_tile_cannot_be_repainted() {
        let mut board = Board::default();
        let p = Pos::new(2, 2);
        assert!(board.paint(p, Agent::Pink));
        assert!(board.lock(p, Agent::Pink));
        assert!(!board.paint(p, Agent::Green));
        assert_eq!(board.tile(p).owner, Owner::Pink);
        assert!(!board.lock(p, Agent::Pink));
    }

    #[test]
    fn cannot_lock_foreign_or_neutral_tile() {
        let mut board = Board::default();
        let p = Pos::new(5, 1);
        assert!(!board.lock(p, Agent::Green));
        board.paint(p, Agent::Pink);
        assert!(!board.lock(p, Agent::Green));
        assert!(!board.tile(p).locked);
    }
}
