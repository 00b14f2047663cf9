//! Residual blocks start as exact identities (branch scale alpha = 0), so a
//! freshly initialized network computes the same function no matter how
//! many blocks it stacks. Demonstrated bit-for-bit.
//!
//!     cargo run --example identity_at_init

use ndarray::Array2;
use tom::model::{TomArch, TomModel, VeMode};
use tom::numerics::{Mode, Rng};
use tom::universe::{generate_gp_universe, GpUniverseConfig};

fn main() {
    let universe = generate_gp_universe(&GpUniverseConfig::reduced(3, 2, 1));
    let task = universe.tasks.iter().find(|t| t.id == "gp_3x2").unwrap();
    let targets: Vec<String> = task.output_var_names().iter().map(|s| s.to_string()).collect();
    let x: Array2<f64> = task.test.x.clone();
    let x_obs = Array2::from_shape_fn((x.nrows(), task.input_idx.len()), |(r, c)| {
        x[[r, task.input_idx[c]]]
    });

    let mut outputs = Vec::new();
    for n_blocks in [2, 5] {
        let arch = TomArch {
            n_blocks,
            ..TomArch::default()
        };
        let model = TomModel::build(arch, &[task], VeMode::Learned, 42);
        let mut rng = Rng::from_seed(0);
        let (pred, _) = model.forward(task, &x_obs, &task.input_idx, &targets, Mode::Eval, &mut rng);
        println!(
            "{n_blocks} blocks per stage: first prediction {:+.17}",
            pred[[0, 0]]
        );
        outputs.push(pred);
    }
    let identical = outputs[0]
        .iter()
        .zip(outputs[1].iter())
        .all(|(a, b)| a.to_bits() == b.to_bits());
    println!(
        "outputs bitwise identical across depths: {}",
        if identical { "yes" } else { "NO" }
    );
}
