use serde::{Deserialize, Serialize};

use super::{ActorCriticParams, Gradients, NetError, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 3e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-5,
        }
    }
}

/// Adam with bias correction. Moments mirror the parameter layout.
#[derive(Debug, Clone)]
pub struct Adam<T> {
    pub config: AdamConfig,
    pub(crate) m: Vec<T>,
    pub(crate) v: Vec<T>,
    pub(crate) step: u64,
}

impl<T: Scalar> Adam<T> {
    pub fn new(config: AdamConfig, n_params: usize) -> Self {
        Adam {
            config,
            m: vec![T::zero(); n_params],
            v: vec![T::zero(); n_params],
            step: 0,
        }
    }

    pub fn for_params(config: AdamConfig, params: &ActorCriticParams<T>) -> Self {
        Self::new(config, params.as_slice().len())
    }

    pub fn from_parts(config: AdamConfig, m: Vec<T>, v: Vec<T>, step: u64) -> Result<Self, NetError> {
        if m.len() != v.len() {
            return Err(NetError::ShapeMismatch("moment vectors differ in length".into()));
        }
        Ok(Adam { config, m, v, step })
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn first_moment(&self) -> &[T] {
        &self.m
    }

    pub fn second_moment(&self) -> &[T] {
        &self.v
    }

    /// One update: `θ ← θ − lr · m̂ / (√v̂ + ε)`.
    pub fn apply(&mut self, params: &mut ActorCriticParams<T>, grads: &Gradients<T>) -> Result<(), NetError> {
        let n = params.as_slice().len();
        if grads.as_slice().len() != n || self.m.len() != n {
            return Err(NetError::ShapeMismatch(format!(
                "params {n}, grads {}, moments {}",
                grads.as_slice().len(),
                self.m.len()
            )));
        }
        self.step += 1;
        let c = self.config;
        let t = self.step as i32;
        let b1 = T::lit(c.beta1);
        let b2 = T::lit(c.beta2);
        let one_b1 = T::lit(1.0 - c.beta1);
        let one_b2 = T::lit(1.0 - c.beta2);
        let bc1 = T::lit(1.0 - c.beta1.powi(t));
        let bc2 = T::lit(1.0 - c.beta2.powi(t));
        let lr = T::lit(c.lr);
        let eps = T::lit(c.eps);
        for (((p, g), m), v) in params
            .as_mut_slice()
            .iter_mut()
            .zip(grads.as_slice())
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            *m = b1 * *m + one_b1 * *g;
            *v = b2 * *v + one_b2 * *g * *g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p = *p - lr * m_hat / (v_hat.sqrt() + eps);
        }
        Ok(())
    }
}

/// Rescales `grads` so their joint L2 norm is at most `max_norm`. Returns
/// the norm before clipping.
pub fn clip_global_norm<T: Scalar>(grads: &mut Gradients<T>, max_norm: T) -> T {
    let norm = grads.l2_norm();
    if norm > max_norm {
        let s = max_norm / norm;
        for g in grads.as_mut_slice() {
            *g = *g * s;
        }
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{init_params, NetConfig};

    fn grads_with_norm(norm: f64) -> Gradients<f64> {
        let p = init_params::<f64>(NetConfig::tiny(), 1).unwrap();
        let mut g = Gradients::zeros(p.layout().clone());
        let n = g.as_slice().len();
        for (i, v) in g.as_mut_slice().iter_mut().enumerate() {
            *v = ((i % 7) as f64 - 3.0) + 0.5;
        }
        let cur = g.l2_norm();
        for v in g.as_mut_slice() {
            *v *= norm / cur;
        }
        assert_eq!(g.as_slice().len(), n);
        g
    }

    #[test]
    fn clipping_scales_large_norms_only() {
        let mut g = grads_with_norm(1.0);
        let before = g.clone();
        let pre = clip_global_norm(&mut g, 0.5);
        assert!((pre - 1.0).abs() < 1e-12);
        assert!((g.l2_norm() - 0.5).abs() < 1e-12);
        for (a, b) in g.as_slice().iter().zip(before.as_slice()) {
            assert!((a - 0.5 * b).abs() < 1e-15);
        }

        let mut g = grads_with_norm(0.3);
        let before = g.clone();
        clip_global_norm(&mut g, 0.5);
        assert_eq!(g.as_slice(), before.as_slice());
    }

    #[test]
    fn zero_gradient_leaves_params_and_decays_moments() {
        let mut p = init_params::<f64>(NetConfig::tiny(), 1).unwrap();
        let orig = p.clone();
        let mut adam = Adam::for_params(AdamConfig::default(), &p);
        adam.m.iter_mut().for_each(|m| *m = 1.0);
        adam.v.iter_mut().for_each(|v| *v = 4.0);
        let g = Gradients::zeros(p.layout().clone());
        // Non-zero moments move the parameters, so test the decay on a
        // fresh optimizer state separately.
        adam.apply(&mut p, &g).unwrap();
        assert!(adam.m.iter().all(|m| (*m - 0.9).abs() < 1e-15));
        assert!(adam.v.iter().all(|v| (*v - 4.0 * 0.999).abs() < 1e-12));
        assert_eq!(adam.step_count(), 1);

        let mut p = orig.clone();
        let mut fresh = Adam::for_params(AdamConfig::default(), &p);
        fresh.apply(&mut p, &g).unwrap();
        assert_eq!(p.as_slice(), orig.as_slice());
    }

    #[test]
    fn first_step_matches_direct_recurrence() {
        let mut p = init_params::<f64>(NetConfig::tiny(), 3).unwrap();
        let orig = p.clone();
        let mut g = Gradients::zeros(p.layout().clone());
        for (i, v) in g.as_mut_slice().iter_mut().enumerate() {
            *v = if i % 2 == 0 { 0.3 + i as f64 * 1e-4 } else { -2.0 };
        }
        let cfg = AdamConfig::default();
        let mut adam = Adam::for_params(cfg, &p);
        adam.apply(&mut p, &g).unwrap();
        for ((new, old), gi) in p.as_slice().iter().zip(orig.as_slice()).zip(g.as_slice()) {
            // Direct evaluation of one Adam step from zero moments.
            let m = (1.0 - cfg.beta1) * gi;
            let v = (1.0 - cfg.beta2) * gi * gi;
            let m_hat = m / (1.0 - cfg.beta1);
            let v_hat = v / (1.0 - cfg.beta2);
            let want = old - cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
            assert!((new - want).abs() < 1e-15);
            // Bias-corrected first step has magnitude ≈ lr.
            let step = (new - old).abs();
            assert!((step - cfg.lr).abs() < cfg.lr * 1e-3, "{step}");
        }
    }

    #[test]
    fn independent_optimizers_do_not_share_state() {
        let mut pa = init_params::<f64>(NetConfig::tiny(), 1).unwrap();
        let mut pb = init_params::<f64>(NetConfig::tiny(), 2).unwrap();
        let mut a = Adam::for_params(AdamConfig::default(), &pa);
        let b = Adam::for_params(AdamConfig::default(), &pb);
        let mut g = Gradients::zeros(pa.layout().clone());
        g.as_mut_slice().iter_mut().for_each(|v| *v = 1.0);
        a.apply(&mut pa, &g).unwrap();
        assert_eq!(a.step_count(), 1);
        assert_eq!(b.step_count(), 0);
        assert!(b.first_moment().iter().all(|m| *m == 0.0));
        let before = pb.clone();
        let _ = &mut pb;
        assert_eq!(pb.as_slice(), before.as_slice());
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let mut p = init_params::<f64>(NetConfig::tiny(), 1).unwrap();
        let other = init_params::<f64>(NetConfig::default(), 1).unwrap();
        let mut adam = Adam::for_params(AdamConfig::default(), &p);
        let g = Gradients::zeros(other.layout().clone());
        assert!(adam.apply(&mut p, &g).is_err());
    }
}
