//! Concentric-hypersphere universe: classification tasks where class c
//! occupies the radius-c annulus around a task-specific origin.

use ndarray::Array2;

use crate::numerics::Rng;

use super::task::{
    LossKind, MetricKind, OracleMeta, OutputSpec, Split, Task, Universe, UniverseKind,
};

#[derive(Debug, Clone)]
pub struct HypersphereUniverseConfig {
    /// Inclusive range of feature counts; the paper grid is 1..=10.
    pub features: (usize, usize),
    /// Inclusive range of class counts; the paper grid is 2..=10.
    pub classes: (usize, usize),
    pub train_per_class: usize,
    pub val_per_class: usize,
    pub test_per_class: usize,
    pub seed: u64,
}

impl Default for HypersphereUniverseConfig {
    fn default() -> Self {
        HypersphereUniverseConfig {
            features: (1, 10),
            classes: (2, 10),
            train_per_class: 5,
            val_per_class: 5,
            test_per_class: 100,
            seed: 0,
        }
    }
}

impl HypersphereUniverseConfig {
    pub fn reduced(max_features: usize, max_classes: usize, seed: u64) -> Self {
        HypersphereUniverseConfig {
            features: (1, max_features),
            classes: (2, max_classes),
            seed,
            ..Default::default()
        }
    }
}

/// Uniform direction on the unit (n-1)-sphere via normalized Gaussian draws;
/// n = 1 degenerates to a random sign.
fn unit_direction(n: usize, rng: &mut Rng) -> Vec<f64> {
    loop {
        let v = rng.normal_vec(n);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub fn generate_hypersphere_universe(config: &HypersphereUniverseConfig) -> Universe {
    let root = Rng::from_seed(config.seed);
    let mut tasks = Vec::new();
    let mut task_index = 0u64;
    for n in config.features.0..=config.features.1 {
        for m in config.classes.0..=config.classes.1 {
            tasks.push(generate_task(config, &root, task_index, n, m));
            task_index += 1;
        }
    }
    Universe {
        kind: UniverseKind::Hyperspheres,
        tasks,
    }
}

fn generate_task(
    config: &HypersphereUniverseConfig,
    root: &Rng,
    task_index: u64,
    n: usize,
    m: usize,
) -> Task {
    let origin = root.derive("sphere_origin", task_index, 0).normal_vec(n);

    let draw_split = |label: u64, per_class: usize| {
        let mut rng = root.derive("sphere_samples", task_index, label);
        let total = per_class * m;
        let mut x = Array2::zeros((total, n));
        let mut labels = Vec::with_capacity(total);
        let mut row = 0;
        for class in 1..=m {
            for _ in 0..per_class {
                let dir = unit_direction(n, &mut rng);
                for (j, d) in dir.iter().enumerate() {
                    x[[row, j]] = origin[j] + class as f64 * d;
                }
                labels.push(class - 1);
                row += 1;
            }
        }
        Split {
            x,
            labels: Some(labels),
        }
    };

    Task {
        id: format!("sphere_{n}x{m}"),
        value_vars: (0..n).map(|i| format!("f{i}")).collect(),
        input_idx: (0..n).collect(),
        output: OutputSpec::Classes {
            class_vars: (0..m).map(|c| format!("class{c}")).collect(),
        },
        train: draw_split(0, config.train_per_class),
        val: draw_split(1, config.val_per_class),
        test: draw_split(2, config.test_per_class),
        loss_kind: LossKind::SquaredHinge,
        metric: MetricKind::Accuracy,
        autoencode: false,
        oracle: Some(OracleMeta::HypersphereOrigin(origin)),
    }
}
