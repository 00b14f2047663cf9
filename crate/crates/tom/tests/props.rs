//! Property tests for structural invariants.

use ndarray::Array2;
use proptest::prelude::*;

use tom::model::{TomArch, TomModel, VeMode};
use tom::numerics::{load_checkpoint, save_checkpoint, Mode, Params, Rng};
use tom::universe::{generate_gp_universe, sample_variable_subset, GpUniverseConfig};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn subsets_are_sorted_distinct_nonempty(n in 1usize..40, seed in 0u64..1000) {
        let mut rng = Rng::from_seed(seed);
        let s = sample_variable_subset(n, &mut rng);
        prop_assert!(!s.is_empty() && s.len() <= n);
        prop_assert!(s.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(*s.last().unwrap() < n);
    }

    #[test]
    fn checkpoints_round_trip_bitwise(seed in 0u64..500, n in 1usize..6) {
        let dir = tempfile::tempdir().unwrap();
        let mut params = Params::new();
        let mut rng = Rng::from_seed(seed);
        for i in 0..n {
            let len = 1 + (i * 7) % 13;
            let values: Vec<f64> = (0..len).map(|_| rng.normal() * 1e3).collect();
            params.add(&format!("t{i}"), &[len], values);
        }
        let path = dir.path().join("p.tomf");
        save_checkpoint(&params, &path).unwrap();
        let mut restored = Params::new();
        for i in 0..n {
            let len = 1 + (i * 7) % 13;
            restored.add(&format!("t{i}"), &[len], vec![0.0; len]);
        }
        load_checkpoint(&mut restored, &path).unwrap();
        for (a, b) in params.iter().zip(restored.iter()) {
            prop_assert_eq!(a.name.clone(), b.name.clone());
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn observed_order_never_changes_predictions(perm_seed in 0u64..200) {
        let universe = generate_gp_universe(&GpUniverseConfig::reduced(4, 1, 3));
        let task = universe.tasks.iter().find(|t| t.id == "gp_4x1").unwrap();
        let arch = TomArch { hidden: 8, latent: 6, n_blocks: 1, ..TomArch::default() };
        let model = TomModel::build(arch, &[task], VeMode::Learned, 11);
        let targets: Vec<String> =
            task.output_var_names().iter().map(|s| s.to_string()).collect();

        let base: Vec<usize> = vec![0, 1, 2, 3];
        let mut perm = base.clone();
        // Fisher-Yates with the property seed.
        let mut rng = Rng::from_seed(perm_seed);
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.below(i + 1));
        }
        let x_of = |order: &[usize]| {
            Array2::from_shape_fn((3, order.len()), |(r, c)| {
                task.train.x[[r, task.input_idx[order[c]]]]
            })
        };
        let mut r1 = Rng::from_seed(0);
        let (a, _) = model.forward(task, &x_of(&base), &base, &targets, Mode::Eval, &mut r1);
        let mut r2 = Rng::from_seed(0);
        let (b, _) = model.forward(task, &x_of(&perm), &perm, &targets, Mode::Eval, &mut r2);
        for (x, y) in a.iter().zip(b.iter()) {
            prop_assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}
