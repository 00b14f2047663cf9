//! Transposed Gaussian-process universe: each task's variables are
//! measurements of a shared 1-D zero-mean GP at fixed locations; one
//! function draw per sample.

use ndarray::Array2;

use crate::numerics::cholesky::{cholesky_factor, sample_with_factor};
use crate::numerics::Rng;

use super::task::{
    LossKind, MetricKind, OracleMeta, OutputSpec, Split, Task, Universe, UniverseKind,
};

#[derive(Debug, Clone)]
pub struct GpUniverseConfig {
    pub length_scale: f64,
    pub location_range: (f64, f64),
    /// Inclusive ranges of (#inputs, #outputs); the full paper grid is
    /// 1..=10 x 1..=10 for 100 tasks.
    pub inputs: (usize, usize),
    pub outputs: (usize, usize),
    pub train_samples: usize,
    pub val_samples: usize,
    pub test_samples: usize,
    pub seed: u64,
}

impl Default for GpUniverseConfig {
    fn default() -> Self {
        GpUniverseConfig {
            length_scale: 1.0,
            location_range: (0.0, 5.0),
            inputs: (1, 10),
            outputs: (1, 10),
            train_samples: 10,
            val_samples: 10,
            test_samples: 100,
            seed: 0,
        }
    }
}

impl GpUniverseConfig {
    /// Reduced grid used at desk scale.
    pub fn reduced(max_inputs: usize, max_outputs: usize, seed: u64) -> Self {
        GpUniverseConfig {
            inputs: (1, max_inputs),
            outputs: (1, max_outputs),
            seed,
            ..Default::default()
        }
    }
}

pub fn rbf_kernel(locations: &[f64], length_scale: f64) -> Array2<f64> {
    let n = locations.len();
    Array2::from_shape_fn((n, n), |(a, b)| {
        let d = locations[a] - locations[b];
        (-d * d / (2.0 * length_scale * length_scale)).exp()
    })
}

pub fn generate_gp_universe(config: &GpUniverseConfig) -> Universe {
    let root = Rng::from_seed(config.seed);
    let mut tasks = Vec::new();
    let mut task_index = 0u64;
    for n_in in config.inputs.0..=config.inputs.1 {
        for n_out in config.outputs.0..=config.outputs.1 {
            tasks.push(generate_task(config, &root, task_index, n_in, n_out));
            task_index += 1;
        }
    }
    Universe {
        kind: UniverseKind::TransposedGp,
        tasks,
    }
}

fn generate_task(
    config: &GpUniverseConfig,
    root: &Rng,
    task_index: u64,
    n_in: usize,
    n_out: usize,
) -> Task {
    let n_vars = n_in + n_out;
    let mut loc_rng = root.derive("gp_locations", task_index, 0);
    let (lo, hi) = config.location_range;
    let locations: Vec<f64> = (0..n_vars).map(|_| loc_rng.uniform_in(lo, hi)).collect();
    let kernel = rbf_kernel(&locations, config.length_scale);
    let factor = cholesky_factor(&kernel);

    let draw_split = |label: u64, count: usize| {
        let mut rng = root.derive("gp_samples", task_index, label);
        let mut x = Array2::zeros((count, n_vars));
        for s in 0..count {
            let draw = sample_with_factor(&factor, &mut rng);
            for (c, v) in draw.into_iter().enumerate() {
                x[[s, c]] = v;
            }
        }
        Split { x, labels: None }
    };

    let value_vars: Vec<String> = (0..n_in)
        .map(|i| format!("in{i}"))
        .chain((0..n_out).map(|o| format!("out{o}")))
        .collect();

    Task {
        id: format!("gp_{n_in}x{n_out}"),
        value_vars,
        input_idx: (0..n_in).collect(),
        output: OutputSpec::Values {
            output_idx: (n_in..n_vars).collect(),
        },
        train: draw_split(0, config.train_samples),
        val: draw_split(1, config.val_samples),
        test: draw_split(2, config.test_samples),
        loss_kind: LossKind::Mse,
        metric: MetricKind::Mse,
        autoencode: true,
        oracle: Some(OracleMeta::GpLocations(locations)),
    }
}
