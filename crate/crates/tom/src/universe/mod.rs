//! Task and dataset model: synthetic universe generators, real-data
//! loaders, on-disk formats, and the observed-subset sampler.

pub mod cifar;
pub mod gp;
pub mod hypersphere;
pub mod subset;
pub mod tabular;
pub mod task;
pub mod temperature;

pub use cifar::{generate_cifar_surrogate, load_cifar_gray, read_tomd, write_tomd};
pub use gp::{generate_gp_universe, GpUniverseConfig};
pub use hypersphere::{generate_hypersphere_universe, HypersphereUniverseConfig};
pub use subset::sample_variable_subset;
pub use tabular::{load_tabular_task, load_task, load_universe, save_task, save_universe};
pub use task::{
    LossKind, MetricKind, OracleMeta, OutputSpec, Split, SplitKind, Task, Universe, UniverseKind,
};
pub use temperature::{load_daily_temperature, write_synthetic_series};
