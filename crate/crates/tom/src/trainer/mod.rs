//! Training loops, evaluation, comparison metrics, and result reporting.

pub mod config;
pub mod eval;
pub mod metrics;
pub mod report;
pub mod train;

pub use config::{BatchPolicy, LrSchedule, TrainConfig, TrainMode};
pub use eval::{evaluate, mean_signed_score, Predictor};
pub use metrics::{
    angular_ranks, average_ranks, metric_suite, pearson, spearman, MethodSummary, ScoreTable,
};
pub use report::{metadata_json, results_csv, summary_json};
pub use train::{
    finetune_tom, train, EpochRecord, RunResult, TrainedModel, FINETUNE_MIN_TRAIN,
    FINETUNE_PATIENCE, FINETUNE_SMA_WINDOW,
};
