//! Train on sliding windows of a daily temperature series and watch the
//! learned 2-D variable embeddings recover the temporal order of the
//! day-lag variables.
//!
//!     cargo run --example ve_recovery_temperature

use tom::trainer::{angular_ranks, spearman, train, BatchPolicy, TrainConfig, TrainMode, TrainedModel};
use tom::universe::load_daily_temperature;
use tom::universe::temperature::write_synthetic_series;

fn main() {
    let dir = std::env::temp_dir().join("tom_ve_recovery");
    std::fs::create_dir_all(&dir).unwrap();
    let csv = dir.join("temps.csv");
    write_synthetic_series(&csv, 10, 7).unwrap();
    let universe = load_daily_temperature(&csv).unwrap();
    let task = &universe.tasks[0];
    println!(
        "1 task, {} windows ({} train / {} val / {} test)",
        task.train.len() + task.val.len() + task.test.len(),
        task.train.len(),
        task.val.len(),
        task.test.len()
    );

    let cfg = TrainConfig {
        steps: 6000,
        steps_per_epoch: 2000,
        batch_policy: BatchPolicy::Fixed(32),
        seed: 0,
        ..TrainConfig::default()
    };
    let (model, result) = train(&universe, TrainMode::Tom, &cfg);
    println!("test RMSE {:.3}", result.reported_test[&task.id]);

    let TrainedModel::Tom(m) = model else { unreachable!() };
    let points: Vec<(f64, f64)> = task
        .value_vars
        .iter()
        .map(|v| {
            let z = m.ve.get(&m.params, &task.id, v);
            (z[0], z[1])
        })
        .collect();
    let ranks = angular_ranks(&points);
    let lags: Vec<f64> = (0..points.len()).map(|i| i as f64).collect();
    println!("\nvar   ve (2-D)              angular rank");
    for (i, var) in task.value_vars.iter().enumerate() {
        println!(
            "{:4} ({:+.4}, {:+.4})   {}",
            var, points[i].0, points[i].1, ranks[i]
        );
    }
    println!(
        "\nSpearman |rho| (day lag vs angular order): {:.3}",
        spearman(&lags, &ranks).abs()
    );
}
