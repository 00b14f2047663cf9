//! Multi-task learning engine built around a single shared
//! encoder-core-decoder network conditioned on learned per-variable
//! embeddings. The same trunk predicts output-variable values from observed
//! input-variable values across tasks with completely disjoint variable
//! sets; only the C-dimensional variable embeddings differ per variable.
//!
//! The crate is organized as:
//! - [`numerics`]: the deterministic numerical kernel (layers, losses, Adam,
//!   seeded RNG, Cholesky sampling, gradient checking, checkpoints);
//! - [`model`]: the conditioned encoder/core/decoder architecture and the
//!   deep-residual baseline family;
//! - [`universe`]: synthetic task generators and dataset loaders;
//! - [`trainer`]: multi-task and single-task training loops, schedules, and
//!   the evaluation metric suite;
//! - [`cli`]: the command-line driver.
//!
//! See the `examples/` directory for runnable entry points into each
//! capability, and the `tom` binary for the batch interface.

pub mod cli;
pub mod model;
pub mod numerics;
pub mod trainer;
pub mod universe;
