//! Summary statistics over per-seed vs-random win rates: mean, sample
//! standard deviation, one-sample t against two baselines, and the
//! correlation with the self-play win rate.

use paint_wars::eval::{mean, one_sample_t, pearson_r, sample_std, wilson_interval, Z_95};

const SELF_PLAY: [f64; 10] = [64.0, 55.4, 49.9, 67.1, 56.1, 55.5, 55.6, 56.3, 59.0, 58.4];
const VS_RANDOM: [f64; 10] = [93.9, 56.8, 84.8, 90.8, 55.7, 75.8, 80.6, 74.7, 79.2, 78.5];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("mean {:.2}  std {:.2}", mean(&VS_RANDOM)?, sample_std(&VS_RANDOM)?);
    for mu0 in [50.0, 21.6] {
        let (t, dof) = one_sample_t(&VS_RANDOM, mu0)?;
        println!("t({dof}) = {t:.2} against {mu0}");
    }
    println!("pearson r (self-play, vs random) = {:.3}", pearson_r(&SELF_PLAY, &VS_RANDOM)?);
    for (wins, games) in [(50, 100), (396, 500)] {
        let ci = wilson_interval(wins, games, Z_95)?;
        println!("{wins}/{games}: [{:.3}, {:.3}] half-width {:.4}", ci.low, ci.high, ci.half_width);
    }
    Ok(())
}
