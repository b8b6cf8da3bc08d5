//! Random-vs-random fairness on both starting layouts, plus the exact
//! colour-swap check.

use paint_wars::eval::{fairness_check, swap_equivariance_violations, wilson_interval, Z_95};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let games: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1000);
    let report = fairness_check(games, 0)?;
    for (name, side) in [("standard", report.standard), ("swapped", report.swapped)] {
        let ci = wilson_interval(side.pink_wins, side.games, Z_95)?;
        println!(
            "{name:9} pink {:.3} [{:.3}, {:.3}]  green {:.3}  ties {:.3}",
            side.pink_wr, ci.low, ci.high, side.green_wr, side.tie_rate
        );
    }
    println!("colour-swap violations over 100 games: {}", swap_equivariance_violations(100, 0)?);
    Ok(())
}
