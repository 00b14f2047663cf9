//! Generate a reduced transposed-GP universe, train the shared conditioned
//! model briefly, and compare learned variable embeddings against the
//! ground-truth GP locations.
//!
//!     cargo run --example gp_universe

use tom::trainer::{train, TrainConfig, TrainMode, TrainedModel};
use tom::universe::{generate_gp_universe, GpUniverseConfig, OracleMeta};

fn main() {
    let universe = generate_gp_universe(&GpUniverseConfig::reduced(3, 3, 7));
    println!("{} tasks, e.g.:", universe.tasks.len());
    for task in universe.tasks.iter().take(3) {
        println!(
            "  {:8} {} inputs -> {} outputs, {} train / {} val / {} test samples",
            task.id,
            task.n_inputs(),
            task.n_outputs(),
            task.train.len(),
            task.val.len(),
            task.test.len()
        );
    }

    let cfg = TrainConfig {
        steps: 4000,
        steps_per_epoch: 1000,
        tasks_per_step: 1,
        dropout: 0.5,
        weight_decay: 1e-4,
        seed: 0,
        ..TrainConfig::default()
    };
    let (model, result) = train(&universe, TrainMode::Tom, &cfg);
    println!("\ntest MSE after {} steps:", cfg.steps);
    for (task_id, mse) in &result.reported_test {
        println!("  {task_id:8} {mse:.4}");
    }

    // Each GP variable has a scalar ground-truth location; the learned 2-D
    // embeddings should start organizing by it even after a short run.
    let TrainedModel::Tom(m) = model else { unreachable!() };
    let task = universe.tasks.iter().find(|t| t.id == "gp_3x3").unwrap();
    let Some(OracleMeta::GpLocations(locs)) = &task.oracle else { unreachable!() };
    println!("\n{} variable embeddings vs true locations:", task.id);
    for (var, loc) in task.value_vars.iter().zip(locs) {
        let z = m.ve.get(&m.params, &task.id, var);
        println!("  {var:5} location {loc:+.3}  ve ({:+.4}, {:+.4})", z[0], z[1]);
    }
}
