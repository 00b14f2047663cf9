//! Observed-subset sampling for autoencoding tasks.

use crate::numerics::Rng;

/// Draw a random subset of variable indices: the size k is uniform over
/// {1..n_vars} so every subset size has an equal chance, then a uniform
/// k-subset is drawn. Returned sorted.
pub fn sample_variable_subset(n_vars: usize, rng: &mut Rng) -> Vec<usize> {
    assert!(n_vars >= 1, "cannot subset an empty variable set");
    let k = 1 + rng.below(n_vars);
    rng.index_sample(n_vars, k)
}
