use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{ActorCriticParams, Layout, NetConfig, NetError, Scalar};
use crate::rng::{stream_rng, Stream};

/// A `rows × cols` matrix with orthonormal rows (if `rows <= cols`) or
/// orthonormal columns, scaled by `gain`. Row-major.
///
/// QR of a standard-normal matrix, with Q's columns sign-corrected by the
/// diagonal of R so the result is uniformly distributed.
pub fn orthogonal<R: Rng + ?Sized>(rows: usize, cols: usize, gain: f64, rng: &mut R) -> Vec<f64> {
    let (tall, short) = (rows.max(cols), rows.min(cols));
    let a = DMatrix::<f64>::from_fn(tall, short, |_, _| rng.sample(StandardNormal));
    let qr = a.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..short {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    // q is tall × short with orthonormal columns.
    let mut out = vec![0.0; rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            let v = if rows >= cols { q[(i, j)] } else { q[(j, i)] };
            out[i * cols + j] = gain * v;
        }
    }
    out
}

/// Fresh parameters: orthogonal weights (gain √2 for hidden layers, 0.01
/// for the policy output, 1.0 for the value output), zero biases, unit
/// layer-norm scales and zero shifts.
pub fn init_params<T: Scalar>(config: NetConfig, seed: u64) -> Result<ActorCriticParams<T>, NetError> {
    init_params_indexed(config, seed, 0)
}

/// Like [`init_params`] but drawing from init stream `index`, so several
/// networks can be initialised independently from one seed.
pub fn init_params_indexed<T: Scalar>(config: NetConfig, seed: u64, index: u64) -> Result<ActorCriticParams<T>, NetError> {
    let layout = Layout::new(config)?;
    Ok(init_with_layout(layout, seed, index))
}

fn init_with_layout<T: Scalar>(layout: Arc<Layout>, seed: u64, index: u64) -> ActorCriticParams<T> {
    let mut rng = stream_rng(seed, Stream::Init, index);
    let mut params = ActorCriticParams::<T>::zeros(layout.clone());
    for (slot, gain) in layout.linear_layers() {
        let w = orthogonal(slot.out, slot.inp, gain, &mut rng);
        let dst = params.slice_mut(slot.weight, slot.out * slot.inp);
        for (d, s) in dst.iter_mut().zip(w) {
            *d = T::lit(s);
        }
    }
    for (_, norm) in &layout.trunk {
        params.slice_mut(norm.scale, norm.dim).fill(T::one());
    }
    params
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gram(w: &[f64], rows: usize, cols: usize) -> Vec<f64> {
        // Gram matrix on the smaller dimension.
        let n = rows.min(cols);
        let mut g = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                g[a * n + b] = if rows <= cols {
                    (0..cols).map(|k| w[a * cols + k] * w[b * cols + k]).sum()
                } else {
                    (0..rows).map(|k| w[k * cols + a] * w[k * cols + b]).sum()
                };
            }
        }
        g
    }

    fn frobenius_from_scaled_identity(g: &[f64], n: usize, scale: f64) -> f64 {
        let mut acc = 0.0;
        for a in 0..n {
            for b in 0..n {
                let want = if a == b { scale } else { 0.0 };
                acc += (g[a * n + b] - want).powi(2);
            }
        }
        acc.sqrt()
    }

    #[test]
    fn every_layer_is_orthogonal_with_its_gain() {
        let params = init_params::<f64>(NetConfig::default(), 7).unwrap();
        let layout = params.layout().clone();
        for (slot, gain) in layout.linear_layers() {
            let w = params.slice(slot.weight, slot.out * slot.inp);
            let g = gram(w, slot.out, slot.inp);
            let n = slot.out.min(slot.inp);
            let err = frobenius_from_scaled_identity(&g, n, gain * gain);
            assert!(err < 1e-5, "layer {}x{} err {err}", slot.out, slot.inp);
            assert!(params.slice(slot.bias, slot.out).iter().all(|b| *b == 0.0));
        }
        for (_, norm) in &layout.trunk {
            assert!(params.slice(norm.scale, norm.dim).iter().all(|v| *v == 1.0));
            assert!(params.slice(norm.shift, norm.dim).iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let a = init_params::<f32>(NetConfig::tiny(), 11).unwrap();
        let b = init_params::<f32>(NetConfig::tiny(), 11).unwrap();
        let c = init_params::<f32>(NetConfig::tiny(), 12).unwrap();
        let bits = |p: &ActorCriticParams<f32>| p.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(bits(&a), bits(&c));
        let d = init_params_indexed::<f32>(NetConfig::tiny(), 11, 1).unwrap();
        assert_ne!(bits(&a), bits(&d));
    }
}
