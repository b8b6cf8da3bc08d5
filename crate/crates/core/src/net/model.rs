//! Forward and reverse-mode passes of the shared-trunk actor-critic.
//!
//! Trunk layer: `z = x·Wᵀ + b`, `y = scale ⊙ (z − μ)/√(σ² + ε) + shift`,
//! `h = relu(y)`; statistics are per row. Heads: one ReLU hidden layer, then
//! an affine output (5 logits, or 1 value).

use super::scalar::{gemm, View};
use super::params::LinearSlot;
use super::{ActorCriticParams, Gradients, NetError, Scalar};

pub const LAYER_NORM_EPS: f64 = 1e-5;

#[derive(Debug, Clone)]
struct TrunkCache<T> {
    normalized: Vec<T>,
    inv_std: Vec<T>,
    /// Post-ReLU activation; the next layer's input.
    out: Vec<T>,
}

/// Everything the backward pass needs, plus the network outputs.
#[derive(Debug, Clone)]
pub struct ForwardTrace<T> {
    batch: usize,
    n_actions: usize,
    param_len: usize,
    input: Vec<T>,
    trunk: Vec<TrunkCache<T>>,
    actor_hidden: Vec<T>,
    critic_hidden: Vec<T>,
    logits: Vec<T>,
    log_probs: Vec<T>,
    probs: Vec<T>,
    values: Vec<T>,
}

impl<T: Scalar> ForwardTrace<T> {
    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// `B × n_actions`, row-major.
    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn prob_row(&self, row: usize) -> &[T] {
        &self.probs[row * self.n_actions..(row + 1) * self.n_actions]
    }

    /// Log-softmax of the logits, `B × n_actions`.
    pub fn log_probs(&self) -> &[T] {
        &self.log_probs
    }

    pub fn log_prob_row(&self, row: usize) -> &[T] {
        &self.log_probs[row * self.n_actions..(row + 1) * self.n_actions]
    }

    pub fn logits(&self) -> &[T] {
        &self.logits
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }
}

/// Loss gradients with respect to the network outputs.
#[derive(Debug, Clone)]
pub struct OutputGrads<T> {
    /// `B × n_actions`.
    pub logits: Vec<T>,
    /// `B`.
    pub values: Vec<T>,
}

impl<T: Scalar> OutputGrads<T> {
    pub fn zeros(batch: usize, n_actions: usize) -> Self {
        OutputGrads {
            logits: vec![T::zero(); batch * n_actions],
            values: vec![T::zero(); batch],
        }
    }
}

fn linear_forward<T: Scalar>(params: &ActorCriticParams<T>, slot: LinearSlot, x: &[T], batch: usize) -> Vec<T> {
    let w = params.slice(slot.weight, slot.out * slot.inp);
    let b = params.slice(slot.bias, slot.out);
    let mut z = Vec::with_capacity(batch * slot.out);
    for _ in 0..batch {
        z.extend_from_slice(b);
    }
    gemm(
        x,
        View::row_major(batch, slot.inp),
        w,
        View::row_major(slot.out, slot.inp).t(),
        T::one(),
        &mut z,
        View::row_major(batch, slot.out),
    );
    z
}

fn relu_in_place<T: Scalar>(v: &mut [T]) {
    for x in v {
        if *x < T::zero() {
            *x = T::zero();
        }
    }
}

/// Runs the network on a row-major `batch × obs_dim` input.
pub fn forward<T: Scalar>(params: &ActorCriticParams<T>, batch_obs: &[T], batch: usize) -> Result<ForwardTrace<T>, NetError> {
    let layout = params.layout().clone();
    let cfg = layout.config();
    if batch_obs.len() != batch * cfg.obs_dim {
        return Err(NetError::ShapeMismatch(format!(
            "input has {} values, expected {batch}×{}",
            batch_obs.len(),
            cfg.obs_dim
        )));
    }
    if batch_obs.iter().any(|v| !v.is_finite()) {
        return Err(NetError::NonFiniteInput);
    }
    let eps = T::lit(LAYER_NORM_EPS);

    let mut trunk: Vec<TrunkCache<T>> = Vec::with_capacity(layout.trunk.len());
    for (i, (lin, norm)) in layout.trunk.iter().enumerate() {
        let x: &[T] = if i == 0 { batch_obs } else { &trunk[i - 1].out };
        let mut z = linear_forward(params, *lin, x, batch);
        let dim = norm.dim;
        let n = T::from_usize(dim).unwrap();
        let scale = params.slice(norm.scale, dim);
        let shift = params.slice(norm.shift, dim);
        let mut inv_std = Vec::with_capacity(batch);
        for row in z.chunks_exact_mut(dim) {
            let mean = row.iter().copied().sum::<T>() / n;
            let var = row.iter().map(|v| (*v - mean) * (*v - mean)).sum::<T>() / n;
            let is = T::one() / (var + eps).sqrt();
            for v in row.iter_mut() {
                *v = (*v - mean) * is;
            }
            inv_std.push(is);
        }
        let normalized = z;
        let mut out = normalized.clone();
        for row in out.chunks_exact_mut(dim) {
            for ((v, s), b) in row.iter_mut().zip(scale).zip(shift) {
                *v = *s * *v + *b;
            }
        }
        relu_in_place(&mut out);
        trunk.push(TrunkCache { normalized, inv_std, out });
    }
    let features = &trunk.last().expect("non-empty trunk").out;

    let mut actor_hidden = linear_forward(params, layout.actor[0], features, batch);
    relu_in_place(&mut actor_hidden);
    let logits = linear_forward(params, layout.actor[1], &actor_hidden, batch);

    let mut critic_hidden = linear_forward(params, layout.critic[0], features, batch);
    relu_in_place(&mut critic_hidden);
    let values = linear_forward(params, layout.critic[1], &critic_hidden, batch);

    let a = cfg.n_actions;
    let mut log_probs = vec![T::zero(); batch * a];
    let mut probs = vec![T::zero(); batch * a];
    for ((lg, lp), p) in logits
        .chunks_exact(a)
        .zip(log_probs.chunks_exact_mut(a))
        .zip(probs.chunks_exact_mut(a))
    {
        let max = lg.iter().copied().fold(T::neg_infinity(), T::max);
        let lse = max + lg.iter().map(|v| (*v - max).exp()).sum::<T>().ln();
        for j in 0..a {
            lp[j] = lg[j] - lse;
            p[j] = lp[j].exp();
        }
    }

    Ok(ForwardTrace {
        batch,
        n_actions: a,
        param_len: layout.len(),
        input: batch_obs.to_vec(),
        trunk,
        actor_hidden,
        critic_hidden,
        logits,
        log_probs,
        probs,
        values,
    })
}

/// Accumulates weight and bias gradients of one affine layer and returns
/// the gradient with respect to its input when requested.
fn linear_backward<T: Scalar>(
    params: &ActorCriticParams<T>,
    grads: &mut Gradients<T>,
    slot: LinearSlot,
    input: &[T],
    dz: &[T],
    batch: usize,
    want_input_grad: bool,
) -> Option<Vec<T>> {
    let (inp, out) = (slot.inp, slot.out);
    {
        let dw = grads.slice_mut(slot.weight, out * inp);
        // dW = dzᵀ · x
        gemm(
            dz,
            View::row_major(batch, out).t(),
            input,
            View::row_major(batch, inp),
            T::one(),
            dw,
            View::row_major(out, inp),
        );
    }
    {
        let db = grads.slice_mut(slot.bias, out);
        for row in dz.chunks_exact(out) {
            for (d, g) in db.iter_mut().zip(row) {
                *d = *d + *g;
            }
        }
    }
    if !want_input_grad {
        return None;
    }
    let w = params.slice(slot.weight, out * inp);
    let mut dx = vec![T::zero(); batch * inp];
    gemm(
        dz,
        View::row_major(batch, out),
        w,
        View::row_major(out, inp),
        T::zero(),
        &mut dx,
        View::row_major(batch, inp),
    );
    Some(dx)
}

fn relu_mask<T: Scalar>(grad: &mut [T], activation: &[T]) {
    for (g, a) in grad.iter_mut().zip(activation) {
        if *a <= T::zero() {
            *g = T::zero();
        }
    }
}

/// Exact gradient of a scalar loss whose output gradients are `out_grads`.
pub fn backward<T: Scalar>(
    params: &ActorCriticParams<T>,
    trace: &ForwardTrace<T>,
    out_grads: &OutputGrads<T>,
) -> Result<Gradients<T>, NetError> {
    let layout = params.layout().clone();
    let batch = trace.batch;
    if trace.param_len != layout.len() || trace.trunk.len() != layout.trunk.len() || trace.n_actions != layout.config().n_actions {
        return Err(NetError::TraceMismatch);
    }
    if out_grads.logits.len() != batch * trace.n_actions || out_grads.values.len() != batch {
        return Err(NetError::ShapeMismatch("output gradients do not match the trace batch".into()));
    }
    let mut grads = Gradients::zeros(layout.clone());
    let features = &trace.trunk.last().expect("non-empty trunk").out;

    // Critic head.
    let mut d_critic_hidden = linear_backward(params, &mut grads, layout.critic[1], &trace.critic_hidden, &out_grads.values, batch, true).unwrap();
    relu_mask(&mut d_critic_hidden, &trace.critic_hidden);
    let mut d_features = linear_backward(params, &mut grads, layout.critic[0], features, &d_critic_hidden, batch, true).unwrap();

    // Actor head.
    let mut d_actor_hidden = linear_backward(params, &mut grads, layout.actor[1], &trace.actor_hidden, &out_grads.logits, batch, true).unwrap();
    relu_mask(&mut d_actor_hidden, &trace.actor_hidden);
    let d_from_actor = linear_backward(params, &mut grads, layout.actor[0], features, &d_actor_hidden, batch, true).unwrap();
    for (d, a) in d_features.iter_mut().zip(d_from_actor) {
        *d = *d + a;
    }

    // Trunk, last layer first.
    let mut d_out = d_features;
    for i in (0..layout.trunk.len()).rev() {
        let (lin, norm) = layout.trunk[i];
        let cache = &trace.trunk[i];
        let dim = norm.dim;
        let n = T::from_usize(dim).unwrap();
        relu_mask(&mut d_out, &cache.out);
        let scale = params.slice(norm.scale, dim).to_vec();
        {
            let (mut dscale, mut dshift) = (vec![T::zero(); dim], vec![T::zero(); dim]);
            for (dy, xh) in d_out.chunks_exact(dim).zip(cache.normalized.chunks_exact(dim)) {
                for j in 0..dim {
                    dscale[j] = dscale[j] + dy[j] * xh[j];
                    dshift[j] = dshift[j] + dy[j];
                }
            }
            for (g, d) in grads.slice_mut(norm.scale, dim).iter_mut().zip(dscale) {
                *g = *g + d;
            }
            for (g, d) in grads.slice_mut(norm.shift, dim).iter_mut().zip(dshift) {
                *g = *g + d;
            }
        }
        let mut dz = vec![T::zero(); batch * dim];
        for (r, ((dy, xh), dzr)) in d_out
            .chunks_exact(dim)
            .zip(cache.normalized.chunks_exact(dim))
            .zip(dz.chunks_exact_mut(dim))
            .enumerate()
        {
            let mut mean_dxh = T::zero();
            let mut mean_dxh_xh = T::zero();
            for j in 0..dim {
                let dxh = dy[j] * scale[j];
                mean_dxh = mean_dxh + dxh;
                mean_dxh_xh = mean_dxh_xh + dxh * xh[j];
            }
            mean_dxh = mean_dxh / n;
            mean_dxh_xh = mean_dxh_xh / n;
            let is = cache.inv_std[r];
            for j in 0..dim {
                let dxh = dy[j] * scale[j];
                dzr[j] = is * (dxh - mean_dxh - xh[j] * mean_dxh_xh);
            }
        }
        let input: &[T] = if i == 0 { &trace.input } else { &trace.trunk[i - 1].out };
        match linear_backward(params, &mut grads, lin, input, &dz, batch, i > 0) {
            Some(dx) => d_out = dx,
            None => break,
        }
    }
    Ok(grads)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{init_params, NetConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_input(rng: &mut ChaCha8Rng, batch: usize, dim: usize) -> Vec<f64> {
        (0..batch * dim).map(|_| rng.random::<f64>()).collect()
    }

    #[test]
    fn probabilities_sum_to_one() {
        let params = init_params::<f32>(NetConfig::default(), 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f32> = (0..4 * 206).map(|_| rng.random::<f32>()).collect();
        let t = forward(&params, &x, 4).unwrap();
        for r in 0..4 {
            let s: f32 = t.prob_row(r).iter().sum();
            assert!((s - 1.0).abs() < 1e-6);
        }
        assert_eq!(t.values().len(), 4);
    }

    #[test]
    fn fresh_policy_is_near_uniform() {
        let params = init_params::<f64>(NetConfig::default(), 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = random_input(&mut rng, 16, 206);
        let t = forward(&params, &x, 16).unwrap();
        let max_dev = t.probs().iter().map(|p| (p - 0.2).abs()).fold(0.0, f64::max);
        assert!(max_dev < 0.02, "max deviation {max_dev}");
    }

    #[test]
    fn batch_equals_rowwise() {
        let params = init_params::<f64>(NetConfig::tiny(), 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_input(&mut rng, 3, 206);
        let all = forward(&params, &x, 3).unwrap();
        for r in 0..3 {
            let one = forward(&params, &x[r * 206..(r + 1) * 206], 1).unwrap();
            for (a, b) in one.probs().iter().zip(all.prob_row(r)) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!((one.values()[0] - all.values()[r]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_finite_input() {
        let params = init_params::<f32>(NetConfig::tiny(), 2).unwrap();
        let mut x = vec![0.5f32; 206];
        x[17] = f32::NAN;
        assert!(matches!(forward(&params, &x, 1), Err(NetError::NonFiniteInput)));
        assert!(matches!(forward(&params, &x[..100], 1), Err(NetError::ShapeMismatch(_))));
    }

    #[test]
    fn zero_output_gradient_gives_zero_gradients() {
        let params = init_params::<f64>(NetConfig::tiny(), 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_input(&mut rng, 2, 206);
        let t = forward(&params, &x, 2).unwrap();
        let g = backward(&params, &t, &OutputGrads::zeros(2, 5)).unwrap();
        assert!(g.as_slice().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn heads_are_disjoint() {
        let params = init_params::<f64>(NetConfig::tiny(), 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = random_input(&mut rng, 2, 206);
        let t = forward(&params, &x, 2).unwrap();

        let mut only_policy = OutputGrads::zeros(2, 5);
        only_policy.logits.iter_mut().for_each(|v| *v = rng.random::<f64>() - 0.5);
        let g = backward(&params, &t, &only_policy).unwrap();
        for name in ["critic.0.weight", "critic.0.bias", "critic.1.weight", "critic.1.bias"] {
            assert!(g.get(name).unwrap().iter().all(|v| *v == 0.0), "{name}");
        }

        let mut only_value = OutputGrads::zeros(2, 5);
        only_value.values = vec![0.7, -1.3];
        let g = backward(&params, &t, &only_value).unwrap();
        for name in ["actor.0.weight", "actor.0.bias", "actor.1.weight", "actor.1.bias"] {
            assert!(g.get(name).unwrap().iter().all(|v| *v == 0.0), "{name}");
        }
    }

    #[test]
    fn trace_from_other_network_is_rejected() {
        let small = init_params::<f64>(NetConfig::tiny(), 2).unwrap();
        let big = init_params::<f64>(NetConfig::default(), 2).unwrap();
        let x = vec![0.1; 206];
        let t = forward(&small, &x, 1).unwrap();
        assert!(matches!(backward(&big, &t, &OutputGrads::zeros(1, 5)), Err(NetError::TraceMismatch)));
    }
}
