//! Train all four model/training combinations on a small classification
//! universe and aggregate their test accuracies with the comparison suite.
//!
//!     cargo run --example baselines_comparison

use ndarray::Array2;

use tom::trainer::{
    metric_suite, train, BatchPolicy, ScoreTable, TrainConfig, TrainMode,
};
use tom::universe::{generate_hypersphere_universe, HypersphereUniverseConfig};

fn main() {
    let universe = generate_hypersphere_universe(&HypersphereUniverseConfig::reduced(3, 3, 5));
    let task_ids: Vec<String> = universe.tasks.iter().map(|t| t.id.clone()).collect();
    println!("{} tasks: {}", task_ids.len(), task_ids.join(", "));

    let cfg = TrainConfig {
        steps: 3000,
        steps_per_epoch: 1000,
        tasks_per_step: 1,
        batch_policy: BatchPolicy::MinCap(200),
        weight_decay: 1e-4,
        hidden: 64,
        latent: 64,
        seed: 0,
        ..TrainConfig::default()
    };

    let modes = [TrainMode::Tom, TrainMode::TomStl, TrainMode::DrMtl, TrainMode::DrStl];
    let mut scores = Array2::zeros((modes.len(), task_ids.len()));
    for (mi, &mode) in modes.iter().enumerate() {
        let (_, result) = train(&universe, mode, &cfg);
        for (ti, id) in task_ids.iter().enumerate() {
            scores[[mi, ti]] = result.reported_test[id];
        }
        println!("{:8} trained", mode.as_str());
    }

    let table = ScoreTable {
        methods: modes.iter().map(|m| m.as_str().to_string()).collect(),
        tasks: task_ids,
        scores,
        higher_is_better: true,
    };
    println!("\nmethod    norm_acc  mean_rank  best%  win%");
    for s in metric_suite(&table) {
        println!(
            "{:9} {:7.2} {:9.3} {:6.1} {:5.1}",
            s.method, s.normalized_accuracy, s.mean_rank, s.best_pct, s.win_pct
        );
    }
}
