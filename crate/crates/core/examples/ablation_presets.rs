//! Trains every ablation preset for the same budget and evaluates each
//! Pink checkpoint against the random player. The default budget is a
//! quick look; pass 12000 for full-length runs (hours on one core).

use paint_wars::env::Agent;
use paint_wars::eval::{evaluate_vs_random, EvalOptions};
use paint_wars::trainer::{Preset, TrainConfig, Trainer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let episodes: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(200);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(42);
    for preset in Preset::ALL {
        let mut t = Trainer::new(TrainConfig { episodes, checkpoint_interval: 0, ..TrainConfig::from_preset(preset, seed) })?;
        let mut worst = 0.0f64;
        while t.episode() < episodes {
            let m = t.run_episode()?;
            worst = worst.max(m.ret_pink.abs().max(m.ret_green.abs()));
        }
        let r = evaluate_vs_random(&t.checkpoint(Agent::Pink), 500, 0, EvalOptions::default())?;
        println!(
            "{:13} vs random {:5.1}% ±{:.1} pp  self-play cum WR {:.3}  max |return| {worst:.1}",
            preset.name(),
            100.0 * r.win_rate,
            100.0 * r.wilson.half_width,
            t.tracker().cumulative()
        );
    }
    Ok(())
}
