//! Plays one game between the scripted painter (Pink) and a random
//! player (Green) and prints the final board.

use paint_wars::env::{determine_winner, reset, step, Agent, EnvConfig, Owner, Pos, GRID_SIZE};
use paint_wars::eval::{GreedyPainter, Player, RandomPlayer};
use paint_wars::rng::{stream_rng, Stream};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1);
    let env = EnvConfig::default();
    let mut rng_pink = stream_rng(seed, Stream::Evaluation, 0);
    let mut rng_green = stream_rng(seed, Stream::Evaluation, 1);
    let (mut state, mut obs_pink, mut obs_green) = reset(&env, false);
    let mut returns = [0.0; 2];
    while !state.done {
        let a = GreedyPainter.act(&state, Agent::Pink, &obs_pink, &mut rng_pink)?;
        let b = RandomPlayer.act(&state, Agent::Green, &obs_green, &mut rng_green)?;
        let r = step(&mut state, &env, a, b)?;
        returns[0] += r.reward_pink;
        returns[1] += r.reward_green;
        obs_pink = r.obs_pink;
        obs_green = r.obs_green;
    }

    // North up: print rows from z = 9 down to z = 0.
    for z in (0..GRID_SIZE).rev() {
        let row: String = (0..GRID_SIZE)
            .map(|x| {
                let t = state.board.tile(Pos { x: x as u8, z: z as u8 });
                match (t.owner, t.locked) {
                    (Owner::Pink, false) => 'p',
                    (Owner::Pink, true) => 'P',
                    (Owner::Green, false) => 'g',
                    (Owner::Green, true) => 'G',
                    (Owner::Neutral, _) => '.',
                }
            })
            .collect();
        println!("{row}");
    }
    println!(
        "tiles {}/{}  locks {}/{}  returns {:.1}/{:.1}  winner {:?}",
        state.tiles(Agent::Pink),
        state.tiles(Agent::Green),
        state.locks(Agent::Pink),
        state.locks(Agent::Green),
        returns[0],
        returns[1],
        determine_winner(&state)?
    );
    Ok(())
}
