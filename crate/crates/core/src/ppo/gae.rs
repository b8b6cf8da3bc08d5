use super::PpoError;

/// Advantages and critic targets for one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct AdvantageSet {
    pub advantages: Vec<f64>,
    /// TD(λ) returns `advantages[t] + values[t]`.
    pub returns: Vec<f64>,
}

/// GAE by the backward recurrence `Â_t = δ_t + γλ Â_{t+1}` with
/// `δ_t = r_t + γ V(s_{t+1}) − V(s_t)` and `V(s_T) = 0` (episodes always
/// terminate, never truncate).
pub fn compute_gae(rewards: &[f64], values: &[f64], gamma: f64, lambda: f64) -> Result<AdvantageSet, PpoError> {
    let n = rewards.len();
    if n == 0 {
        return Err(PpoError::EmptyTrajectory);
    }
    if values.len() != n {
        return Err(PpoError::ShapeMismatch(format!("{n} rewards but {} values", values.len())));
    }
    let mut advantages = vec![0.0; n];
    let mut next_value = 0.0;
    let mut next_adv = 0.0;
    for t in (0..n).rev() {
        let delta = rewards[t] + gamma * next_value - values[t];
        next_adv = delta + gamma * lambda * next_adv;
        advantages[t] = next_adv;
        next_value = values[t];
    }
    let returns = advantages.iter().zip(values).map(|(a, v)| a + v).collect();
    Ok(AdvantageSet { advantages, returns })
}

/// `(Â − mean) / (std + 1e-8)` with the population standard deviation.
pub fn normalize_advantages(adv: &[f64]) -> Vec<f64> {
    if adv.is_empty() {
        return Vec::new();
    }
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let std = (adv.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n).sqrt();
    adv.iter().map(|a| (a - mean) / (std + 1e-8)).collect()
}

/// `1 / (1 − λ)`: the number of steps over which GAE spreads credit.
pub fn effective_horizon(lambda: f64) -> f64 {
    1.0 / (1.0 - lambda)
}

/// `γ^(T−1)`: the weight a Monte-Carlo return gives the final reward when
/// crediting the first action of a `T`-step episode.
pub fn first_step_discount(gamma: f64, episode_length: u32) -> f64 {
    gamma.powi(episode_length as i32 - 1)
}
