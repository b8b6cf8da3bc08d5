//! A short self-play run on a shrunken network, printing a line every
//! few episodes. Pass an output directory to keep the checkpoints.

use paint_wars::net::NetConfig;
use paint_wars::trainer::{Preset, TrainConfig, Trainer};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = std::env::args().nth(1).map(Into::into);
    let config = TrainConfig {
        episodes: 60,
        checkpoint_interval: 20,
        net: NetConfig::tiny(),
        out_dir,
        ..TrainConfig::from_preset(Preset::V3Full, 7)
    };
    let mut trainer = Trainer::new(config)?;
    while trainer.episode() < trainer.config().episodes {
        let m = trainer.run_episode()?;
        if m.ep % 10 == 0 {
            println!(
                "ep {:3}  winner {:?}  return {:6.2}/{:6.2}  entropy {:.3}  expl.var {:5.2}  rolling WR {:.2}",
                m.ep, m.winner, m.ret_pink, m.ret_green, m.ent_pink, m.ev_pink, m.wr_roll100
            );
        }
    }
    println!("{}", serde_json::to_string_pretty(&trainer.summary(None))?);
    Ok(())
}
