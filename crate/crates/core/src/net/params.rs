use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{NetError, Scalar};
use crate::env::{GameAction, OBS_DIM};

/// Layer widths of the shared-trunk actor-critic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetConfig {
    pub obs_dim: usize,
    /// Widths of the affine + layer-norm + ReLU trunk layers.
    pub trunk: Vec<usize>,
    /// Width of the single hidden layer in each head.
    pub head_hidden: usize,
    pub n_actions: usize,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            obs_dim: OBS_DIM,
            trunk: vec![512, 256, 256],
            head_hidden: 128,
            n_actions: GameAction::COUNT,
        }
    }
}

impl NetConfig {
    /// A much narrower network with the same topology, for fast tests.
    pub fn tiny() -> Self {
        NetConfig {
            obs_dim: OBS_DIM,
            trunk: vec![16, 8, 8],
            head_hidden: 8,
            n_actions: GameAction::COUNT,
        }
    }

    pub fn validate(&self) -> Result<(), NetError> {
        if self.obs_dim == 0 || self.head_hidden == 0 || self.n_actions == 0 {
            return Err(NetError::ShapeMismatch("zero-sized layer".into()));
        }
        if self.trunk.is_empty() || self.trunk.contains(&0) {
            return Err(NetError::ShapeMismatch("trunk needs at least one non-empty layer".into()));
        }
        Ok(())
    }

    pub fn trunk_out(&self) -> usize {
        *self.trunk.last().expect("validated trunk")
    }
}

/// Offsets of an affine layer's weight (`[out, in]`, row-major) and bias.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LinearSlot {
    pub inp: usize,
    pub out: usize,
    pub weight: usize,
    pub bias: usize,
}

/// Offsets of a layer-norm's scale and shift.
#[derive(Debug, Clone, Copy)]
pub(crate) struct NormSlot {
    pub dim: usize,
    pub scale: usize,
    pub shift: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorSpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
}

impl TensorSpec {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

/// Where every tensor lives inside the flat parameter vector.
#[derive(Debug, Clone)]
pub struct Layout {
    config: NetConfig,
    tensors: Vec<TensorSpec>,
    pub(crate) trunk: Vec<(LinearSlot, NormSlot)>,
    pub(crate) actor: [LinearSlot; 2],
    pub(crate) critic: [LinearSlot; 2],
    total: usize,
}

struct Builder {
    tensors: Vec<TensorSpec>,
    total: usize,
}

impl Builder {
    fn push(&mut self, name: String, shape: Vec<usize>) -> usize {
        let offset = self.total;
        let spec = TensorSpec { name, shape, offset };
        self.total += spec.len();
        self.tensors.push(spec);
        offset
    }

    fn linear(&mut self, prefix: &str, inp: usize, out: usize) -> LinearSlot {
        let weight = self.push(format!("{prefix}.weight"), vec![out, inp]);
        let bias = self.push(format!("{prefix}.bias"), vec![out]);
        LinearSlot { inp, out, weight, bias }
    }

    fn norm(&mut self, prefix: &str, dim: usize) -> NormSlot {
        let scale = self.push(format!("{prefix}.weight"), vec![dim]);
        let shift = self.push(format!("{prefix}.bias"), vec![dim]);
        NormSlot { dim, scale, shift }
    }
}

impl Layout {
    pub fn new(config: NetConfig) -> Result<Arc<Self>, NetError> {
        config.validate()?;
        let mut b = Builder { tensors: Vec::new(), total: 0 };
        let mut trunk = Vec::new();
        let mut width = config.obs_dim;
        for (i, &out) in config.trunk.iter().enumerate() {
            let lin = b.linear(&format!("trunk.{i}"), width, out);
            let norm = b.norm(&format!("trunk.{i}.norm"), out);
            trunk.push((lin, norm));
            width = out;
        }
        let h = config.head_hidden;
        let actor = [
            b.linear("actor.0", width, h),
            b.linear("actor.1", h, config.n_actions),
        ];
        let critic = [b.linear("critic.0", width, h), b.linear("critic.1", h, 1)];
        Ok(Arc::new(Layout {
            config,
            tensors: b.tensors,
            trunk,
            actor,
            critic,
            total: b.total,
        }))
    }

    pub fn config(&self) -> &NetConfig {
        &self.config
    }

    pub fn tensors(&self) -> &[TensorSpec] {
        &self.tensors
    }

    pub fn tensor(&self, name: &str) -> Option<&TensorSpec> {
        self.tensors.iter().find(|t| t.name == name)
    }

    /// Total number of scalar parameters.
    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// All affine layers with their orthogonal-init gain.
    pub(crate) fn linear_layers(&self) -> Vec<(LinearSlot, f64)> {
        let sqrt2 = std::f64::consts::SQRT_2;
        let mut out: Vec<_> = self.trunk.iter().map(|(l, _)| (*l, sqrt2)).collect();
        out.push((self.actor[0], sqrt2));
        out.push((self.actor[1], 0.01));
        out.push((self.critic[0], sqrt2));
        out.push((self.critic[1], 1.0));
        out
    }
}

/// A flat vector of values laid out per [`Layout`]. Used both for the
/// parameters and their gradients.
#[derive(Debug, Clone)]
pub struct FlatTensors<T> {
    layout: Arc<Layout>,
    data: Vec<T>,
}

/// All weights and biases of the actor-critic network.
pub type ActorCriticParams<T> = FlatTensors<T>;
/// Gradient of a scalar loss with respect to every parameter.
pub type Gradients<T> = FlatTensors<T>;

impl<T: Scalar> FlatTensors<T> {
    pub fn zeros(layout: Arc<Layout>) -> Self {
        let data = vec![T::zero(); layout.len()];
        FlatTensors { layout, data }
    }

    pub fn from_vec(layout: Arc<Layout>, data: Vec<T>) -> Result<Self, NetError> {
        if data.len() != layout.len() {
            return Err(NetError::ShapeMismatch(format!(
                "expected {} values, got {}",
                layout.len(),
                data.len()
            )));
        }
        Ok(FlatTensors { layout, data })
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, name: &str) -> Option<&[T]> {
        self.layout.tensor(name).map(|t| &self.data[t.range()])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut [T]> {
        let range = self.layout.tensor(name)?.range();
        Some(&mut self.data[range])
    }

    pub(crate) fn slice(&self, offset: usize, len: usize) -> &[T] {
        &self.data[offset..offset + len]
    }

    pub(crate) fn slice_mut(&mut self, offset: usize, len: usize) -> &mut [T] {
        &mut self.data[offset..offset + len]
    }

    pub fn same_layout(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.layout, &other.layout) || self.layout.tensors == other.layout.tensors
    }

    /// Euclidean norm over every entry.
    pub fn l2_norm(&self) -> T {
        self.data.iter().map(|v| *v * *v).sum::<T>().sqrt()
    }

    /// Converts every entry to another scalar type.
    pub fn cast<U: Scalar>(&self) -> FlatTensors<U> {
        FlatTensors {
            layout: self.layout.clone(),
            data: self
                .data
                .iter()
                .map(|v| U::from_f64(v.to_f64().expect("finite")).expect("representable"))
                .collect(),
        }
    }
}
