use super::{Agent, EnvConfig, EnvState};

/// Reward for `agent` on the transition `pre -> post`.
///
/// Default rules: `tile_gain × Δtiles + lock_bonus × Δlocks`, plus
/// `±terminal_magnitude` on the final step by the sign of the tile-count
/// difference (a tie pays 0). `Δtiles` is the net change in owned tiles, so it
/// is negative when the opponent paints over the agent's tiles.
///
/// With [`RewardBugs::cumulative_lock_bonus`](super::RewardBugs) the lock term
/// becomes `cumulative_lock_coeff × total_locks` paid on every step, and with
/// `no_terminal_reward` the terminal term is dropped.
pub fn compute_reward(pre: &EnvState, post: &EnvState, agent: Agent, config: &EnvConfig) -> f64 {
    let i = agent.index();
    let delta_tiles = post.tiles_owned[i] as f64 - pre.tiles_owned[i] as f64;
    let mut reward = config.tile_gain_coeff * delta_tiles;

    reward += if config.bugs.cumulative_lock_bonus {
        config.cumulative_lock_coeff * post.locks_total[i] as f64
    } else {
        config.lock_bonus_coeff * (post.locks_total[i] - pre.locks_total[i]) as f64
    };

    if post.done && !config.bugs.no_terminal_reward {
        let own = post.tiles_owned[i];
        let other = post.tiles_owned[agent.opponent().index()];
        reward += config.terminal_magnitude * sign(own as i64 - other as i64);
    }
    reward
}

fn sign(v: i64) -> f64 {
    match v.cmp(&0) {
        std::cmp::Ordering::Greater => 1.0,
        std::cmp::Ordering::Less => -1.0,
        std::cmp::Ordering::Equal => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{reset, Owner, Pos};

    #[test]
    fn basic_terms() {
        let cfg = EnvConfig::default();
        let (pre, _, _) = reset(&cfg, false);
        let mut post = pre.clone();
        post.tiles_owned[0] += 1;
        assert!((compute_reward(&pre, &post, Agent::Pink, &cfg) - 0.1).abs() < 1e-12);
        let mut post = pre.clone();
        post.locks_total[1] += 1;
        assert!((compute_reward(&pre, &post, Agent::Green, &cfg) - 0.5).abs() < 1e-12);
        assert_eq!(compute_reward(&pre, &post, Agent::Pink, &cfg), 0.0);
    }

    /// Hand-built 3×3 region: Green repaints one of Pink's tiles. The expected
    /// reward is derived by recounting the region's tiles before and after.
    #[test]
    fn repaint_loss_recounted_on_small_region() {
        let cfg = EnvConfig::default();
        let (mut pre, _, _) = reset(&cfg, false);
        let region: Vec<Pos> = (0..3).flat_map(|z| (0..3).map(move |x| Pos::new(x, z))).collect();
        for p in &region[..4] {
            pre.board.tile_mut(*p).owner = Owner::Pink;
        }
        pre.board.tile_mut(region[8]).owner = Owner::Green;
        let recount = |s: &EnvState, o: Owner| region.iter().filter(|p| s.board.tile(**p).owner == o).count();
        pre.tiles_owned = [pre.board.count_owned(Owner::Pink) as u32, pre.board.count_owned(Owner::Green) as u32];

        let mut post = pre.clone();
        post.board.paint(region[2], Agent::Green);
        post.tiles_owned = [post.board.count_owned(Owner::Pink) as u32, post.board.count_owned(Owner::Green) as u32];

        let d_pink = recount(&post, Owner::Pink) as f64 - recount(&pre, Owner::Pink) as f64;
        let d_green = recount(&post, Owner::Green) as f64 - recount(&pre, Owner::Green) as f64;
        assert_eq!(d_pink, -1.0);
        let r_pink = compute_reward(&pre, &post, Agent::Pink, &cfg);
        let r_green = compute_reward(&pre, &post, Agent::Green, &cfg);
        assert!((r_pink - 0.1 * d_pink).abs() < 1e-12);
        assert!((r_pink + 0.1).abs() < 1e-12);
        assert!((r_green - 0.1 * d_green).abs() < 1e-12);
    }
}
