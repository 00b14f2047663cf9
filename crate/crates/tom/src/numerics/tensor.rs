//! Named parameter storage with paired gradient buffers.

use ndarray::{ArrayView2, ArrayViewMut2};

use super::rng::Rng;

/// A named, shaped array of parameters and its gradient buffer.
#[derive(Debug, Clone)]
pub struct ParamTensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
    pub grad: Vec<f64>,
    /// Whether this tensor participates in L2 weight decay. Variable
    /// embeddings are exempt; everything else decays.
    pub weight_decay: bool,
}

impl ParamTensor {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// View as a 2-D matrix. Panics if the tensor is not rank 2.
    pub fn as_matrix(&self) -> ArrayView2<'_, f64> {
        assert_eq!(self.shape.len(), 2, "{} is not rank 2", self.name);
        ArrayView2::from_shape((self.shape[0], self.shape[1]), &self.values).unwrap()
    }

    pub fn grad_matrix_mut(&mut self) -> ArrayViewMut2<'_, f64> {
        assert_eq!(self.shape.len(), 2, "{} is not rank 2", self.name);
        ArrayViewMut2::from_shape((self.shape[0], self.shape[1]), &mut self.grad).unwrap()
    }
}

/// Handle into a [`Params`] store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamId(pub(crate) usize);

/// Central parameter store. Layers hold [`ParamId`] handles; the optimizer,
/// checkpointing, and the gradient checker walk the store in registration
/// order.
#[derive(Debug, Clone, Default)]
pub struct Params {
    tensors: Vec<ParamTensor>,
}

impl Params {
    pub fn new() -> Self {
        Params::default()
    }

    pub fn add(&mut self, name: &str, shape: &[usize], values: Vec<f64>) -> ParamId {
        let n: usize = shape.iter().product();
        assert_eq!(values.len(), n, "{name}: {shape:?} does not hold {} values", values.len());
        self.tensors.push(ParamTensor {
            name: name.to_string(),
            shape: shape.to_vec(),
            grad: vec![0.0; n],
            values,
            weight_decay: true,
        });
        ParamId(self.tensors.len() - 1)
    }

    /// Add a tensor initialized uniformly in ±1/sqrt(fan_in).
    pub fn add_fan_in(&mut self, name: &str, shape: &[usize], fan_in: usize, rng: &mut Rng) -> ParamId {
        let bound = 1.0 / (fan_in as f64).sqrt();
        let n: usize = shape.iter().product();
        let values = (0..n).map(|_| rng.uniform_in(-bound, bound)).collect();
        self.add(name, shape, values)
    }

    pub fn add_zeros(&mut self, name: &str, shape: &[usize]) -> ParamId {
        let n: usize = shape.iter().product();
        self.add(name, shape, vec![0.0; n])
    }

    pub fn get(&self, id: ParamId) -> &ParamTensor {
        &self.tensors[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut ParamTensor {
        &mut self.tensors[id.0]
    }

    pub fn set_no_decay(&mut self, id: ParamId) {
        self.tensors[id.0].weight_decay = false;
    }

    pub fn zero_grads(&mut self) {
        for t in &mut self.tensors {
            t.grad.iter_mut().for_each(|g| *g = 0.0);
        }
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ParamTensor> {
        self.tensors.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut ParamTensor> {
        self.tensors.iter_mut()
    }

    /// Total number of scalar parameters.
    pub fn scalar_count(&self) -> usize {
        self.tensors.iter().map(|t| t.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_grads_clears_everything() {
        let mut p = Params::new();
        let id = p.add("w", &[2, 2], vec![1.0, 2.0, 3.0, 4.0]);
        p.get_mut(id).grad.copy_from_slice(&[1.0; 4]);
        p.zero_grads();
        assert!(p.get(id).grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn values_and_grad_share_shape() {
        let mut p = Params::new();
        let mut rng = Rng::from_seed(0);
        let id = p.add_fan_in("w", &[3, 5], 3, &mut rng);
        let t = p.get(id);
        assert_eq!(t.values.len(), t.grad.len());
        assert_eq!(t.values.len(), 15);
        let bound = 1.0 / 3f64.sqrt();
        assert!(t.values.iter().all(|v| v.abs() <= bound));
    }
}
