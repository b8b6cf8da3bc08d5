//! How much credit the first step of a 250-step episode receives for a
//! terminal reward, with Monte Carlo returns and with GAE.

use paint_wars::ppo::{compute_gae, effective_horizon, first_step_discount};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gamma = 0.99;
    let t = 250;
    println!("gamma^{} = {:.4}", t - 1, first_step_discount(gamma, t as u32));
    println!("GAE lambda 0.95 effective horizon: {:.0} steps", effective_horizon(0.95));

    // A single +1 at the last step, with a zero critic.
    let mut rewards = vec![0.0; t];
    rewards[t - 1] = 1.0;
    let values = vec![0.0; t];
    for lambda in [1.0, 0.95] {
        let a = compute_gae(&rewards, &values, gamma, lambda)?;
        println!(
            "lambda {lambda:4}: A_0 {:.2e}  A_200 {:.2e}  A_249 {:.2e}",
            a.advantages[0], a.advantages[200], a.advantages[t - 1]
        );
    }
    Ok(())
}
