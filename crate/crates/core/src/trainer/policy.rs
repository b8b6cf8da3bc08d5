use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::env::{Observation, OBS_DIM};
use crate::net::{forward, normalize_observation, ActorCriticParams, NetError};

/// An action drawn from the policy, with the quantities PPO needs to keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionSample {
    pub action: usize,
    pub log_prob: f32,
    pub value: f32,
    /// Entropy of the full action distribution at this state.
    pub entropy: f32,
}

/// The network input for a raw observation.
pub fn network_input(obs: &Observation, use_norm: bool) -> [f32; OBS_DIM] {
    if use_norm {
        normalize_observation(obs)
    } else {
        obs.0
    }
}

/// Samples an action from the categorical policy using `rng`.
pub fn select_action<R: Rng + ?Sized>(
    params: &ActorCriticParams<f32>,
    obs: &Observation,
    use_norm: bool,
    rng: &mut R,
) -> Result<ActionSample, NetError> {
    sample_from_input(params, &network_input(obs, use_norm), rng)
}

/// [`select_action`] on an already prepared network input.
pub fn sample_from_input<R: Rng + ?Sized>(
    params: &ActorCriticParams<f32>,
    input: &[f32],
    rng: &mut R,
) -> Result<ActionSample, NetError> {
    let (probs, log_probs, value) = evaluate(params, input)?;
    let dist = WeightedIndex::new(&probs).map_err(|e| NetError::ShapeMismatch(format!("degenerate policy: {e}")))?;
    let action = dist.sample(rng);
    Ok(ActionSample {
        action,
        log_prob: log_probs[action],
        value,
        entropy: entropy(&probs, &log_probs),
    })
}

/// Log-probability and value of a given action (used when the action was
/// chosen by something other than the policy).
pub fn score_action(params: &ActorCriticParams<f32>, input: &[f32], action: usize) -> Result<ActionSample, NetError> {
    let (probs, log_probs, value) = evaluate(params, input)?;
    if action >= probs.len() {
        return Err(NetError::ShapeMismatch(format!("action {action} out of range")));
    }
    Ok(ActionSample {
        action,
        log_prob: log_probs[action],
        value,
        entropy: entropy(&probs, &log_probs),
    })
}

/// The most probable action; ties go to the lowest index.
pub fn greedy_action(params: &ActorCriticParams<f32>, obs: &Observation, use_norm: bool) -> Result<usize, NetError> {
    let (probs, _, _) = evaluate(params, &network_input(obs, use_norm))?;
    let mut best = 0;
    for (i, p) in probs.iter().enumerate() {
        if *p > probs[best] {
            best = i;
        }
    }
    Ok(best)
}

fn evaluate(params: &ActorCriticParams<f32>, input: &[f32]) -> Result<(Vec<f32>, Vec<f32>, f32), NetError> {
    let trace = forward(params, input, 1)?;
    Ok((trace.prob_row(0).to_vec(), trace.log_prob_row(0).to_vec(), trace.values()[0]))
}

fn entropy(probs: &[f32], log_probs: &[f32]) -> f32 {
    -probs.iter().zip(log_probs).map(|(p, lp)| p * lp).sum::<f32>()
}
