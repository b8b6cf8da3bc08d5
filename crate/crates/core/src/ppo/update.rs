use serde::{Deserialize, Serialize};

use super::gae::normalize_advantages;
use super::{explained_variance, AdvantageSet, PpoError, PpoHyperparams, Trajectory};
use crate::env::OBS_DIM;
use crate::net::{backward, clip_global_norm, forward, ActorCriticParams, Adam, ForwardTrace, Gradients, OutputGrads, Scalar};

/// Loss terms of one full-batch evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub policy: f64,
    pub value: f64,
    pub entropy: f64,
    /// `policy + value_coef · value − entropy_coef · entropy`.
    pub total: f64,
    /// `mean(log π_old − log π_new)`.
    pub approx_kl: f64,
    /// Fraction of steps where the probability ratio left `[1 − ε, 1 + ε]`.
    pub clip_fraction: f64,
    /// Largest `|ρ_t − 1|` in the batch.
    pub max_ratio_deviation: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct UpdateStats {
    /// Loss terms under the behaviour parameters (first epoch, before any step).
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    /// KL estimate at the last epoch.
    pub approx_kl: f64,
    /// Of the collection-time value estimates against the TD(λ) returns.
    pub explained_variance: f64,
    pub clip_fraction: f64,
    /// Largest `|ρ_t − 1|` at the first epoch; zero up to float rounding.
    pub initial_ratio_deviation: f64,
    /// Global gradient norm before clipping, last epoch.
    pub grad_norm: f64,
}

/// Full-batch PPO loss and its gradient with respect to every parameter.
///
/// `advantages` are used as given (normalise beforehand if desired).
pub fn ppo_loss_and_grad<T: Scalar>(
    params: &ActorCriticParams<T>,
    obs: &[T],
    actions: &[usize],
    old_log_probs: &[f64],
    advantages: &[f64],
    returns: &[f64],
    hp: &PpoHyperparams,
) -> Result<(LossBreakdown, Gradients<T>), PpoError> {
    let n = actions.len();
    if n == 0 {
        return Err(PpoError::EmptyTrajectory);
    }
    if old_log_probs.len() != n || advantages.len() != n || returns.len() != n {
        return Err(PpoError::ShapeMismatch(format!("batch of {n} actions with mismatched per-step arrays")));
    }
    let trace = forward(params, obs, n)?;
    let (loss, out_grads) = loss_at_outputs(&trace, actions, old_log_probs, advantages, returns, hp)?;
    let grads = backward(params, &trace, &out_grads)?;
    Ok((loss, grads))
}

fn loss_at_outputs<T: Scalar>(
    trace: &ForwardTrace<T>,
    actions: &[usize],
    old_log_probs: &[f64],
    advantages: &[f64],
    returns: &[f64],
    hp: &PpoHyperparams,
) -> Result<(LossBreakdown, OutputGrads<T>), PpoError> {
    let n = actions.len();
    let a_dim = trace.n_actions();
    let inv_n = T::one() / T::from_usize(n).unwrap();
    let eps_lo = T::lit(1.0 - hp.clip_eps);
    let eps_hi = T::lit(1.0 + hp.clip_eps);
    let vcoef = T::lit(hp.value_coef);
    let ecoef = T::lit(hp.entropy_coef);

    let mut grads = OutputGrads::<T>::zeros(n, a_dim);
    let mut loss = LossBreakdown::default();
    let mut policy = T::zero();
    let mut value = T::zero();
    let mut entropy = T::zero();
    let mut kl = T::zero();
    let mut clipped = 0usize;
    let mut max_dev = 0.0f64;

    for t in 0..n {
        let a = actions[t];
        if a >= a_dim {
            return Err(PpoError::ShapeMismatch(format!("action {a} out of range")));
        }
        let lp = trace.log_prob_row(t);
        let p = trace.prob_row(t);
        let adv = T::lit(advantages[t]);
        let old = T::lit(old_log_probs[t]);

        let ratio = (lp[a] - old).exp();
        let clamped = ratio.max(eps_lo).min(eps_hi);
        let unclipped_obj = ratio * adv;
        let clipped_obj = clamped * adv;
        if clamped != ratio {
            clipped += 1;
        }
        max_dev = max_dev.max((ratio - T::one()).abs().to_f64().unwrap());
        // d/dρ of min(ρÂ, clip(ρ)Â): Â on the unclipped branch, 0 once clipped.
        let d_logp = if unclipped_obj <= clipped_obj {
            policy = policy - unclipped_obj * inv_n;
            -adv * ratio * inv_n
        } else {
            policy = policy - clipped_obj * inv_n;
            T::zero()
        };
        kl = kl + (old - lp[a]) * inv_n;

        let row_entropy = -(0..a_dim).map(|j| p[j] * lp[j]).sum::<T>();
        entropy = entropy + row_entropy * inv_n;

        let g = &mut grads.logits[t * a_dim..(t + 1) * a_dim];
        for j in 0..a_dim {
            let indicator = if j == a { T::one() } else { T::zero() };
            // policy term through log π(a|s)
            g[j] = d_logp * (indicator - p[j])
                // −c_e · H, with ∂H_row/∂z_j = −p_j (log p_j + H_row)
                + ecoef * inv_n * p[j] * (lp[j] + row_entropy);
        }

        let v = trace.values()[t];
        let err = v - T::lit(returns[t]);
        value = value + err * err * inv_n;
        grads.values[t] = vcoef * T::lit(2.0) * err * inv_n;
    }

    loss.policy = policy.to_f64().unwrap();
    loss.value = value.to_f64().unwrap();
    loss.entropy = entropy.to_f64().unwrap();
    loss.total = loss.policy + hp.value_coef * loss.value - hp.entropy_coef * loss.entropy;
    loss.approx_kl = kl.to_f64().unwrap();
    loss.clip_fraction = clipped as f64 / n as f64;
    loss.max_ratio_deviation = max_dev;
    Ok((loss, grads))
}

/// Runs `hp.epochs` full-batch epochs of clipped PPO on one trajectory,
/// each followed by global-norm clipping and an Adam step.
pub fn ppo_update<T: Scalar>(
    params: &mut ActorCriticParams<T>,
    optimizer: &mut Adam<T>,
    traj: &Trajectory,
    adv: &AdvantageSet,
    hp: &PpoHyperparams,
) -> Result<UpdateStats, PpoError> {
    traj.validate()?;
    let n = traj.len();
    if adv.advantages.len() != n || adv.returns.len() != n {
        return Err(PpoError::ShapeMismatch(format!(
            "{} advantages for a trajectory of {n} steps",
            adv.advantages.len()
        )));
    }
    if params.layout().config().obs_dim != OBS_DIM {
        return Err(PpoError::ShapeMismatch("network input width differs from observation width".into()));
    }
    let obs: Vec<T> = traj.obs.iter().map(|v| T::lit(*v as f64)).collect();
    let old: Vec<f64> = traj.log_probs.iter().map(|v| *v as f64).collect();
    let used_adv = if hp.normalize_advantages && n >= 2 {
        normalize_advantages(&adv.advantages)
    } else {
        adv.advantages.clone()
    };

    let mut stats = UpdateStats {
        explained_variance: explained_variance(&traj.values_f64(), &adv.returns),
        ..UpdateStats::default()
    };
    let max_norm = T::lit(hp.max_grad_norm);
    for epoch in 0..hp.epochs {
        let (loss, mut grads) = ppo_loss_and_grad(params, &obs, &traj.actions, &old, &used_adv, &adv.returns, hp)?;
        if epoch == 0 {
            stats.policy_loss = loss.policy;
            stats.value_loss = loss.value;
            stats.entropy = loss.entropy;
            stats.initial_ratio_deviation = loss.max_ratio_deviation;
        }
        stats.approx_kl = loss.approx_kl;
        stats.clip_fraction = loss.clip_fraction;
        stats.grad_norm = clip_global_norm(&mut grads, max_norm).to_f64().unwrap();
        optimizer.apply(params, &grads)?;
    }
    Ok(stats)
}
