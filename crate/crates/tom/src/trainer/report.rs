//! Serialization of run results: a long-form CSV of per-epoch metrics, a
//! JSON summary, and run metadata.

use serde::Serialize;

use crate::universe::{MetricKind, Universe};

use super::config::TrainConfig;
use super::train::RunResult;

fn metric_name(m: MetricKind) -> &'static str {
    match m {
        MetricKind::Mse => "mse",
        MetricKind::Rmse => "rmse",
        MetricKind::Bce => "bce",
        MetricKind::Accuracy => "accuracy",
    }
}

/// Long-form CSV: task_id,epoch,split,metric_name,value.
pub fn results_csv(universe: &Universe, result: &RunResult) -> String {
    let mut out = String::from("task_id,epoch,split,metric_name,value\n");
    let metric_of: std::collections::BTreeMap<&str, &str> = universe
        .tasks
        .iter()
        .map(|t| (t.id.as_str(), metric_name(t.metric)))
        .collect();
    for e in &result.epochs {
        for (split, map) in [("val", &e.val), ("test", &e.test)] {
            for (task_id, value) in map {
                let metric = metric_of.get(task_id.as_str()).copied().unwrap_or("metric");
                out.push_str(&format!("{task_id},{},{split},{metric},{value}\n", e.epoch));
            }
        }
    }
    out
}

#[derive(Serialize)]
struct Summary<'a> {
    mode: &'a str,
    n_epochs: usize,
    best_epoch: Option<usize>,
    stopped_by_schedule: bool,
    reported_test: &'a std::collections::BTreeMap<String, f64>,
}

pub fn summary_json(result: &RunResult) -> String {
    let s = Summary {
        mode: result.mode,
        n_epochs: result.epochs.len(),
        best_epoch: result.best_epoch,
        stopped_by_schedule: result.stopped_by_schedule,
        reported_test: &result.reported_test,
    };
    serde_json::to_string_pretty(&s).expect("summary serialization")
}

#[derive(Serialize)]
struct RunMetadata<'a> {
    mode: &'a str,
    n_tasks: usize,
    config: &'a TrainConfig,
}

pub fn metadata_json(universe: &Universe, mode: &str, cfg: &TrainConfig) -> String {
    serde_json::to_string_pretty(&RunMetadata {
        mode,
        n_tasks: universe.tasks.len(),
        config: cfg,
    })
    .expect("metadata serialization")
}
