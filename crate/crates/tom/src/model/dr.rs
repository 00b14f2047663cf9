//! Deep-residual baseline: per-task input and output affine heads around a
//! shared (or per-task, for single-task training) trunk of unconditioned
//! residual blocks.

use std::collections::BTreeMap;

use ndarray::Array2;

use crate::numerics::layers::{affine_backward, affine_forward, Mode};
use crate::numerics::{ParamId, Params, Rng};
use crate::universe::Task;

use super::block::{BlockCache, BlockKind, ResidualBlock};

#[derive(Debug, Clone)]
pub struct DrArch {
    pub hidden: usize,
    pub n_blocks: usize,
    pub dropout: f64,
}

impl Default for DrArch {
    fn default() -> Self {
        DrArch {
            hidden: 128,
            n_blocks: 3,
            dropout: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
struct DrHead {
    w_in: ParamId,
    b_in: ParamId,
    w_out: ParamId,
    b_out: ParamId,
    n_in: usize,
}

pub struct DrModel {
    pub params: Params,
    pub arch: DrArch,
    trunk: Vec<ResidualBlock>,
    heads: BTreeMap<String, DrHead>,
    init_rng: Rng,
}

pub struct DrTape {
    task_id: String,
    x: Array2<f64>,
    h_in: Array2<f64>,
    blocks: Vec<BlockCache>,
    head_in: Array2<f64>,
}

impl DrModel {
    pub fn build(arch: DrArch, tasks: &[&Task], seed: u64) -> Self {
        let rng = Rng::from_seed(seed).derive("dr_init", 0, 0);
        let mut params = Params::new();
        let trunk = (0..arch.n_blocks)
            .map(|i| {
                ResidualBlock::new(
                    &format!("trunk.block{i}"),
                    BlockKind::Crb,
                    arch.hidden,
                    0,
                    &mut params,
                    &rng,
                )
            })
            .collect();
        let mut model = DrModel {
            params,
            arch,
            trunk,
            heads: BTreeMap::new(),
            init_rng: rng,
        };
        for task in tasks {
            model.register_task(task);
        }
        model
    }

    pub fn register_task(&mut self, task: &Task) {
        let n_in = task.n_inputs();
        let n_out = task.n_outputs();
        let name = format!("head.{}", task.id);
        let rng = &self.init_rng;
        let affine = |params: &mut Params, suffix: &str, rows: usize, cols: usize| {
            let wn = format!("{name}.{suffix}.w");
            let bn = format!("{name}.{suffix}.b");
            (
                params.add_fan_in(&wn, &[rows, cols], rows, &mut rng.derive(&wn, 0, 0)),
                params.add_fan_in(&bn, &[1, cols], rows, &mut rng.derive(&bn, 0, 0)),
            )
        };
        let (w_in, b_in) = affine(&mut self.params, "in", n_in, self.arch.hidden);
        let (w_out, b_out) = affine(&mut self.params, "out", self.arch.hidden, n_out);
        self.heads.insert(
            task.id.clone(),
            DrHead {
                w_in,
                b_in,
                w_out,
                b_out,
                n_in,
            },
        );
    }

    /// Predict this task's outputs from its full input vector.
    pub fn forward(
        &self,
        task: &Task,
        x: &Array2<f64>,
        mode: Mode,
        rng: &mut Rng,
    ) -> (Array2<f64>, DrTape) {
        let head = self
            .heads
            .get(&task.id)
            .unwrap_or_else(|| panic!("task {:?} has no registered head", task.id));
        assert_eq!(x.ncols(), head.n_in, "input width mismatch for {:?}", task.id);
        let h_in = affine_forward(x, &self.params, head.w_in, head.b_in);
        let mut h = h_in.clone();
        let mut blocks = Vec::with_capacity(self.trunk.len());
        for block in &self.trunk {
            let (next, cache) = block.forward(&self.params, &h, None, self.arch.dropout, mode, rng);
            blocks.push(cache);
            h = next;
        }
        let out = affine_forward(&h, &self.params, head.w_out, head.b_out);
        (
            out,
            DrTape {
                task_id: task.id.clone(),
                x: x.clone(),
                h_in,
                blocks,
                head_in: h,
            },
        )
    }

    pub fn backward(&mut self, upstream: &Array2<f64>, tape: &DrTape) {
        let head = self.heads.get(&tape.task_id).unwrap().clone();
        let mut up = affine_backward(upstream, &tape.head_in, &mut self.params, head.w_out, head.b_out);
        for (block, cache) in self.trunk.iter().zip(&tape.blocks).rev() {
            let (next, _) = block.backward(&mut self.params, &up, cache);
            up = next;
        }
        affine_backward(&up, &tape.x, &mut self.params, head.w_in, head.b_in);
        let _ = &tape.h_in;
    }

    pub fn has_task(&self, task_id: &str) -> bool {
        self.heads.contains_key(task_id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::universe::{generate_hypersphere_universe, HypersphereUniverseConfig};

    #[test]
    fn forward_shapes_match_task() {
        let u = generate_hypersphere_universe(&HypersphereUniverseConfig::reduced(3, 3, 5));
        let task = u.tasks.iter().find(|t| t.id == "sphere_2x3").unwrap();
        let arch = DrArch {
            hidden: 8,
            n_blocks: 2,
            dropout: 0.0,
        };
        let model = DrModel::build(arch, &[task], 1);
        let mut rng = Rng::from_seed(0);
        let (out, _) = model.forward(task, &task.train.x, Mode::Eval, &mut rng);
        assert_eq!(out.shape(), [task.train.len(), 3]);
    }

    #[test]
    #[should_panic(expected = "has no registered head")]
    fn unregistered_task_is_an_error() {
        let u = generate_hypersphere_universe(&HypersphereUniverseConfig::reduced(2, 2, 5));
        let arch = DrArch {
            hidden: 4,
            n_blocks: 1,
            dropout: 0.0,
        };
        let model = DrModel::build(arch, &[], 1);
        let mut rng = Rng::from_seed(0);
        model.forward(&u.tasks[0], &u.tasks[0].train.x, Mode::Eval, &mut rng);
    }

    #[test]
    fn backward_matches_finite_differences() {
        let u = generate_hypersphere_universe(&HypersphereUniverseConfig::reduced(2, 2, 5));
        let task = &u.tasks[0];
        let arch = DrArch {
            hidden: 4,
            n_blocks: 1,
            dropout: 0.0,
        };
        let mut model = DrModel::build(arch, &[task], 1);
        let x = task.train.x.slice(ndarray::s![0..3, ..]).to_owned();
        let loss = |model: &DrModel| {
            let mut r = Rng::from_seed(0);
            let (out, _) = model.forward(task, &x, Mode::Eval, &mut r);
            0.5 * out.iter().map(|v| v * v).sum::<f64>()
        };
        let mut r = Rng::from_seed(0);
        let (out, tape) = model.forward(task, &x, Mode::Eval, &mut r);
        model.params.zero_grads();
        model.backward(&out, &tape);
        let grads: Vec<Vec<f64>> = model.params.iter().map(|t| t.grad.clone()).collect();
        let eps = 1e-6;
        let n_tensors = model.params.len();
        for ti in 0..n_tensors {
            let n = model.params.iter().nth(ti).unwrap().len();
            for i in (0..n).step_by(3) {
                let orig = model.params.iter().nth(ti).unwrap().values[i];
                model.params.iter_mut().nth(ti).unwrap().values[i] = orig + eps;
                let lp = loss(&model);
                model.params.iter_mut().nth(ti).unwrap().values[i] = orig - eps;
                let lm = loss(&model);
                model.params.iter_mut().nth(ti).unwrap().values[i] = orig;
                let num = (lp - lm) / (2.0 * eps);
                assert!(
                    (grads[ti][i] - num).abs() < 1e-5,
                    "tensor {ti} coord {i}: {} vs {num}",
                    grads[ti][i]
                );
            }
        }
    }
}
