//! Training configuration and per-universe presets.

use serde::Serialize;

use crate::model::VeMode;
use crate::universe::UniverseKind;

/// How a minibatch is drawn from a task's training split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchPolicy {
    /// `min(cap, n_train)` rows without replacement (default).
    MinCap(usize),
    /// Exactly `b` rows (clamped to the split) without replacement.
    Fixed(usize),
    /// `max(floor, n_train)` rows, drawn with replacement when the split is
    /// smaller than the floor.
    MaxFloor(usize),
}

impl BatchPolicy {
    /// Returns (batch_size, with_replacement) for a split of `n_train` rows.
    pub fn resolve(self, n_train: usize) -> (usize, bool) {
        match self {
            BatchPolicy::MinCap(cap) => (cap.min(n_train), false),
            BatchPolicy::Fixed(b) => (b.min(n_train), false),
            BatchPolicy::MaxFloor(floor) => {
                let b = floor.max(n_train);
                (b, b > n_train)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LrSchedule {
    Constant,
    /// Halve the learning rate when the mean validation score has not
    /// improved for `patience` epochs; after `max_reductions` halvings the
    /// next trigger stops training instead.
    Plateau {
        patience: usize,
        factor: f64,
        max_reductions: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrainMode {
    /// One shared conditioned network over all tasks.
    Tom,
    /// One conditioned network per task.
    TomStl,
    /// Shared residual trunk with per-task heads.
    DrMtl,
    /// Independent residual network per task.
    DrStl,
}

impl TrainMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TrainMode::Tom => "tom",
            TrainMode::TomStl => "tom-stl",
            TrainMode::DrMtl => "dr-mtl",
            TrainMode::DrStl => "dr-stl",
        }
    }
}

impl std::str::FromStr for TrainMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tom" => Ok(TrainMode::Tom),
            "tom-stl" => Ok(TrainMode::TomStl),
            "dr-mtl" => Ok(TrainMode::DrMtl),
            "dr-stl" => Ok(TrainMode::DrStl),
            other => Err(format!(
                "unknown mode {other:?} (expected tom, tom-stl, dr-mtl, or dr-stl)"
            )),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainConfig {
    pub steps: u64,
    pub steps_per_epoch: u64,
    /// Tasks sampled per step; 0 means every task every step.
    pub tasks_per_step: usize,
    pub batch_policy: BatchPolicy,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub dropout: f64,
    pub ve_dim: usize,
    pub hidden: usize,
    pub latent: usize,
    pub n_blocks: usize,
    pub ve_mode: VeMode,
    pub lr_schedule: LrSchedule,
    pub seed: u64,
    /// Row-chunk size used during evaluation to bound memory.
    pub eval_chunk: usize,
    /// Print one progress line per epoch to stderr.
    pub verbose: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            steps: 250_000,
            steps_per_epoch: 1000,
            tasks_per_step: 1,
            batch_policy: BatchPolicy::MinCap(200),
            learning_rate: 1e-3,
            weight_decay: 0.0,
            dropout: 0.0,
            ve_dim: 2,
            hidden: 128,
            latent: 128,
            n_blocks: 3,
            ve_mode: VeMode::Learned,
            lr_schedule: LrSchedule::Constant,
            seed: 0,
            eval_chunk: 64,
            verbose: false,
        }
    }
}

impl TrainConfig {
    /// Published training settings for each universe flavor.
    pub fn preset(kind: UniverseKind) -> Self {
        let base = TrainConfig::default();
        match kind {
            UniverseKind::TransposedGp => TrainConfig {
                steps: 250_000,
                steps_per_epoch: 1000,
                dropout: 0.5,
                weight_decay: 1e-4,
                ..base
            },
            UniverseKind::Hyperspheres => TrainConfig {
                steps: 250_000,
                steps_per_epoch: 1000,
                dropout: 0.0,
                weight_decay: 1e-4,
                ..base
            },
            UniverseKind::Cifar => TrainConfig {
                steps: 500_000,
                steps_per_epoch: 1000,
                batch_policy: BatchPolicy::Fixed(256),
                dropout: 0.0,
                weight_decay: 0.0,
                ..base
            },
            UniverseKind::Temperature => TrainConfig {
                steps: 100_000,
                steps_per_epoch: 100,
                batch_policy: BatchPolicy::Fixed(32),
                dropout: 0.0,
                weight_decay: 0.0,
                ..base
            },
            UniverseKind::Tabular => TrainConfig {
                steps: u64::MAX,
                steps_per_epoch: 10_000,
                tasks_per_step: 32,
                dropout: 0.5,
                weight_decay: 1e-5,
                ve_dim: 128,
                n_blocks: 10,
                lr_schedule: LrSchedule::Plateau {
                    patience: 20,
                    factor: 0.5,
                    max_reductions: 5,
                },
                ..base
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_cap_clamps_to_split() {
        assert_eq!(BatchPolicy::MinCap(200).resolve(10), (10, false));
        assert_eq!(BatchPolicy::MinCap(200).resolve(5000), (200, false));
    }

    #[test]
    fn max_floor_oversamples_small_splits() {
        assert_eq!(BatchPolicy::MaxFloor(200).resolve(10), (200, true));
        assert_eq!(BatchPolicy::MaxFloor(200).resolve(5000), (5000, false));
    }

    #[test]
    fn tabular_preset_uses_plateau_schedule() {
        let cfg = TrainConfig::preset(UniverseKind::Tabular);
        assert!(matches!(
            cfg.lr_schedule,
            LrSchedule::Plateau {
                patience: 20,
                max_reductions: 5,
                ..
            }
        ));
        assert_eq!(cfg.ve_dim, 128);
        assert_eq!(cfg.n_blocks, 10);
        assert_eq!(cfg.tasks_per_step, 32);
    }
}
