mod common;

use common::{SEED_SELF_PLAY_WR, SEED_VS_RANDOM_WR};
use paint_wars::eval::{
    evaluate_player_vs_random, fairness_check, mean, one_sample_t, pearson_r, sample_std, swap_equivariance_violations,
    wilson_interval, GreedyPainter, RandomPlayer, Z_95,
};
use paint_wars::env::EnvConfig;
use paint_wars::ppo::{effective_horizon, first_step_discount, policy_entropy};

#[test]
fn per_seed_summary_statistics() {
    assert!((mean(&SEED_VS_RANDOM_WR).unwrap() - 77.1).abs() < 0.05);
    assert!((sample_std(&SEED_VS_RANDOM_WR).unwrap() - 12.6).abs() < 0.05);
    let (t50, dof) = one_sample_t(&SEED_VS_RANDOM_WR, 50.0).unwrap();
    assert_eq!(dof, 9);
    assert!((t50 - 6.80).abs() < 0.02, "{t50}");
    let (t216, _) = one_sample_t(&SEED_VS_RANDOM_WR, 21.6).unwrap();
    assert!((t216 - 13.93).abs() < 0.03, "{t216}");
    let r = pearson_r(&SEED_SELF_PLAY_WR, &SEED_VS_RANDOM_WR).unwrap();
    assert!((r - 0.47).abs() < 0.01, "{r}");
}

#[test]
fn wilson_half_widths_match_reported_error_bars() {
    assert!((wilson_interval(50, 100, Z_95).unwrap().half_width - 0.0962).abs() < 0.0005);
    assert!((wilson_interval(396, 500, Z_95).unwrap().half_width - 0.0357).abs() < 0.0005);
}

#[test]
fn discount_and_entropy_constants() {
    let d = first_step_discount(0.99, 250);
    assert!((0.080..=0.084).contains(&d));
    assert!((effective_horizon(0.95) - 20.0).abs() < 1e-9);
    assert!((policy_entropy(&[0.2; 5], 5) - 5f64.ln()).abs() < 1e-6);
}

#[test]
fn scripted_painter_beats_random() {
    let r = evaluate_player_vs_random(&GreedyPainter, &EnvConfig::default(), 500, 0, false).unwrap();
    assert!(r.win_rate > 0.6, "{}", r.win_rate);
    let baseline = evaluate_player_vs_random(&RandomPlayer, &EnvConfig::default(), 500, 0, false).unwrap();
    assert!(r.win_rate > baseline.win_rate);
}

#[test]
fn random_play_is_fair() {
    let r = fairness_check(1000, 7).unwrap();
    for side in [r.standard, r.swapped] {
        assert!((0.46..=0.54).contains(&side.pink_wr), "{side:?}");
        assert!(side.tie_rate < 0.05, "{side:?}");
    }
    assert_eq!(swap_equivariance_violations(100, 7).unwrap(), 0);
}
