//! Trajectory storage, generalised advantage estimation, and the clipped
//! PPO update.

mod gae;
mod update;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gae::{compute_gae, effective_horizon, first_step_discount, normalize_advantages, AdvantageSet};
pub use update::{ppo_loss_and_grad, ppo_update, LossBreakdown, UpdateStats};

use crate::env::OBS_DIM;
use crate::net::NetError;

#[derive(Debug, Error)]
pub enum PpoError {
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    #[error(transparent)]
    Net(#[from] NetError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpoHyperparams {
    pub gamma: f64,
    pub lambda: f64,
    pub clip_eps: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    pub epochs: usize,
    pub max_grad_norm: f64,
    pub normalize_advantages: bool,
}

impl Default for PpoHyperparams {
    fn default() -> Self {
        PpoHyperparams {
            gamma: 0.99,
            lambda: 0.95,
            clip_eps: 0.2,
            value_coef: 0.5,
            entropy_coef: 0.01,
            epochs: 4,
            max_grad_norm: 0.5,
            normalize_advantages: true,
        }
    }
}

/// One agent's record of a single episode.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    /// Network inputs, `len × OBS_DIM` row-major (normalised unless the
    /// run disables normalisation).
    pub obs: Vec<f32>,
    pub actions: Vec<usize>,
    /// Behaviour log-probabilities recorded at collection time.
    pub log_probs: Vec<f32>,
    pub values: Vec<f32>,
    pub rewards: Vec<f64>,
    pub dones: Vec<bool>,
}

impl Trajectory {
    pub fn with_capacity(steps: usize) -> Self {
        Trajectory {
            obs: Vec::with_capacity(steps * OBS_DIM),
            actions: Vec::with_capacity(steps),
            log_probs: Vec::with_capacity(steps),
            values: Vec::with_capacity(steps),
            rewards: Vec::with_capacity(steps),
            dones: Vec::with_capacity(steps),
        }
    }

    pub fn push(&mut self, obs: &[f32], action: usize, log_prob: f32, value: f32, reward: f64, done: bool) {
        self.obs.extend_from_slice(obs);
        self.actions.push(action);
        self.log_probs.push(log_prob);
        self.values.push(value);
        self.rewards.push(reward);
        self.dones.push(done);
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn total_reward(&self) -> f64 {
        self.rewards.iter().sum()
    }

    pub fn values_f64(&self) -> Vec<f64> {
        self.values.iter().map(|v| *v as f64).collect()
    }

    /// Checks the shape and terminal-flag invariants.
    pub fn validate(&self) -> Result<(), PpoError> {
        let n = self.len();
        if n == 0 {
            return Err(PpoError::EmptyTrajectory);
        }
        if self.obs.len() != n * OBS_DIM
            || self.log_probs.len() != n
            || self.values.len() != n
            || self.rewards.len() != n
            || self.dones.len() != n
        {
            return Err(PpoError::ShapeMismatch(format!("trajectory arrays disagree with length {n}")));
        }
        if !self.dones[n - 1] || self.dones[..n - 1].iter().any(|d| *d) {
            return Err(PpoError::InvalidTrajectory("exactly the final step must be terminal".into()));
        }
        if self.log_probs.iter().any(|lp| *lp > 0.0 || !lp.is_finite()) {
            return Err(PpoError::InvalidTrajectory("log-probabilities must be finite and ≤ 0".into()));
        }
        Ok(())
    }

    pub fn advantages(&self, hp: &PpoHyperparams) -> Result<AdvantageSet, PpoError> {
        compute_gae(&self.rewards, &self.values_f64(), hp.gamma, hp.lambda)
    }
}

/// `1 − Var(targets − values) / Var(targets)`; 0 when the targets are constant.
pub fn explained_variance(values: &[f64], targets: &[f64]) -> f64 {
    assert_eq!(values.len(), targets.len(), "explained_variance: length mismatch");
    let var_t = variance(targets);
    if var_t == 0.0 {
        return 0.0;
    }
    let resid: Vec<f64> = targets.iter().zip(values).map(|(t, v)| t - v).collect();
    1.0 - variance(&resid) / var_t
}

fn variance(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}

/// Mean Shannon entropy (nats) of row-major probability rows of width
/// `n_actions`, with `0 · ln 0 = 0`.
pub fn policy_entropy(probs: &[f64], n_actions: usize) -> f64 {
    let rows = probs.len() / n_actions;
    if rows == 0 {
        return 0.0;
    }
    let total: f64 = probs
        .chunks_exact(n_actions)
        .map(|row| row.iter().filter(|p| **p > 0.0).map(|p| -p * p.ln()).sum::<f64>())
        .sum();
    total / rows as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn explained_variance_cases() {
        let t = [1.0, 2.0, 4.0, 7.0];
        assert!((explained_variance(&t, &t) - 1.0).abs() < 1e-12);
        let mean = t.iter().sum::<f64>() / 4.0;
        assert!(explained_variance(&[mean; 4], &t).abs() < 1e-12);
        assert_eq!(explained_variance(&[1.0, 2.0], &[3.0, 3.0]), 0.0);
    }

    #[test]
    fn explained_variance_of_uncorrelated_noise_is_not_positive() {
        // Independent noise: Var(t − v) = Var(t) + Var(v) in expectation.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        let v: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
        let direct = {
            let resid: Vec<f64> = t.iter().zip(&v).map(|(a, b)| a - b).collect();
            1.0 - variance(&resid) / variance(&t)
        };
        let ev = explained_variance(&v, &t);
        assert!((ev - direct).abs() < 1e-12);
        assert!(ev <= 0.0, "{ev}");
    }

    #[test]
    fn entropy_bounds() {
        let uniform = [0.2; 10];
        assert!((policy_entropy(&uniform, 5) - 5f64.ln()).abs() < 1e-12);
        let one_hot = [0.0, 0.0, 1.0, 0.0, 0.0];
        assert_eq!(policy_entropy(&one_hot, 5), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let raw: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
            let s: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|r| r / s).collect();
            let h = policy_entropy(&p, 5);
            assert!((0.0..=5f64.ln() + 1e-12).contains(&h));
        }
    }

    #[test]
    fn trajectory_validation() {
        let mut t = Trajectory::with_capacity(2);
        assert!(matches!(t.validate(), Err(PpoError::EmptyTrajectory)));
        t.push(&[0.0; OBS_DIM], 1, -1.6, 0.0, 0.1, false);
        assert!(t.validate().is_err());
        t.push(&[0.0; OBS_DIM], 4, -1.6, 0.0, 0.1, true);
        assert!(t.validate().is_ok());
        t.log_probs[0] = 0.5;
        assert!(t.validate().is_err());
    }
}
