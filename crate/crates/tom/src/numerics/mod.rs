//! Deterministic numerical kernel: parameter storage, dense layer passes,
//! losses, Adam, seeded RNG with derivable substreams, Cholesky-based
//! Gaussian sampling, checkpointing, and a finite-difference gradient
//! checker.

pub mod adam;
pub mod checkpoint;
pub mod cholesky;
pub mod gradcheck;
pub mod layers;
pub mod loss;
pub mod rng;
pub mod tensor;

pub use adam::AdamState;
pub use checkpoint::{load_checkpoint, save_checkpoint, CheckpointError};
pub use cholesky::{cholesky_factor, cholesky_sample, sample_with_factor};
pub use gradcheck::{grad_check, GradCheckReport};
pub use layers::Mode;
pub use loss::{bce_loss, mse_loss, squared_hinge_loss};
pub use rng::Rng;
pub use tensor::{ParamId, ParamTensor, Params};
