//! Evaluates a saved checkpoint against the random player, or a freshly
//! initialised network when no path is given.

use paint_wars::eval::{evaluate_checkpoint_file, evaluate_vs_random, EvalOptions};
use paint_wars::net::{init_params, AgentCheckpoint, NetConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let options = EvalOptions::default();
    let report = match std::env::args().nth(1) {
        Some(path) => evaluate_checkpoint_file(path.as_ref(), 500, 0, options)?,
        None => {
            let untrained = AgentCheckpoint::new(init_params(NetConfig::default(), 0)?, true);
            evaluate_vs_random(&untrained, 200, 0, options)?
        }
    };
    println!(
        "{} games: {} wins, {} losses, {} ties",
        report.games, report.wins, report.losses, report.ties
    );
    println!(
        "win rate {:.3}, 95% Wilson [{:.3}, {:.3}] (±{:.1} pp)",
        report.win_rate,
        report.wilson.low,
        report.wilson.high,
        100.0 * report.wilson.half_width
    );
    println!("checkpoint {}", report.checkpoint_id);
    Ok(())
}
