//! Model components: FiLM conditioning, SkipInit residual blocks, variable
//! embeddings, the conditioned encoder/core/decoder network, and the
//! deep-residual baseline.

pub mod block;
pub mod dr;
pub mod film;
pub mod tom;
pub mod ve;

pub use block::{BlockKind, ResidualBlock};
pub use dr::{DrArch, DrModel, DrTape};
pub use film::{film_modulate, FilmLayer};
pub use tom::{micro_grad_check, TomArch, TomModel, TomTape};
pub use ve::{VariableEmbeddingTable, VeMode, VE_INIT_STD};
