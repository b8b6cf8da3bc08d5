//! Compares the hand-written backward pass of the PPO loss with central
//! differences on a small double-precision network.

use paint_wars::env::OBS_DIM;
use paint_wars::net::{forward, init_params, NetConfig};
use paint_wars::ppo::{ppo_loss_and_grad, PpoHyperparams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut params = init_params::<f64>(NetConfig::tiny(), 0)?;
    let batch = 8;
    let obs: Vec<f64> = (0..batch * OBS_DIM).map(|_| rng.random()).collect();
    let actions: Vec<usize> = (0..batch).map(|_| rng.random_range(0..5)).collect();
    let trace = forward(&params, &obs, batch)?;
    let old: Vec<f64> = (0..batch).map(|i| trace.log_prob_row(i)[actions[i]] - 0.02).collect();
    let adv: Vec<f64> = (0..batch).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
    let ret: Vec<f64> = (0..batch).map(|_| rng.random::<f64>()).collect();
    let hp = PpoHyperparams::default();

    let (loss, grads) = ppo_loss_and_grad(&params, &obs, &actions, &old, &adv, &ret, &hp)?;
    println!("loss {:.6} (policy {:.6}, value {:.6}, entropy {:.6})", loss.total, loss.policy, loss.value, loss.entropy);

    let h = 1e-6;
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let i = rng.random_range(0..params.as_slice().len());
        let orig = params.as_slice()[i];
        params.as_mut_slice()[i] = orig + h;
        let up = ppo_loss_and_grad(&params, &obs, &actions, &old, &adv, &ret, &hp)?.0.total;
        params.as_mut_slice()[i] = orig - h;
        let down = ppo_loss_and_grad(&params, &obs, &actions, &old, &adv, &ret, &hp)?.0.total;
        params.as_mut_slice()[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        let analytic = grads.as_slice()[i];
        worst = worst.max((numeric - analytic).abs() / numeric.abs().max(analytic.abs()).max(1e-6));
    }
    println!("max relative error over 50 parameters: {worst:.2e}");
    Ok(())
}
