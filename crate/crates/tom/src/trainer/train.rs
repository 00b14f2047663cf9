//! Multi-task training loop shared by the conditioned network and the
//! residual baseline, in both multi-task and single-task-per-model forms.

use std::collections::BTreeMap;

use ndarray::Array2;
use serde::Serialize;

use crate::model::{DrArch, DrModel, TomArch, TomModel};
use crate::numerics::adam::AdamState;
use crate::numerics::layers::Mode;
use crate::numerics::loss::{bce_loss, mse_loss, squared_hinge_loss};
use crate::numerics::Rng;
use crate::universe::{sample_variable_subset, LossKind, OutputSpec, Split, Task, Universe};

use super::config::{LrSchedule, TrainConfig, TrainMode};
use super::eval::{evaluate, Predictor};
use crate::universe::SplitKind;

pub enum TrainedModel {
    Tom(TomModel),
    TomStl(BTreeMap<String, TomModel>),
    Dr(DrModel),
    DrStl(BTreeMap<String, DrModel>),
}

impl TrainedModel {
    /// Predictor for one task (single-task modes hold one model per task).
    pub fn predictor_for(&self, task_id: &str) -> Predictor<'_> {
        match self {
            TrainedModel::Tom(m) => Predictor::Tom(m),
            TrainedModel::Dr(m) => Predictor::Dr(m),
            TrainedModel::TomStl(map) => Predictor::Tom(
                map.get(task_id)
                    .unwrap_or_else(|| panic!("no per-task model for {task_id:?}")),
            ),
            TrainedModel::DrStl(map) => Predictor::Dr(
                map.get(task_id)
                    .unwrap_or_else(|| panic!("no per-task model for {task_id:?}")),
            ),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub step: u64,
    pub learning_rate: f64,
    pub train_loss: f64,
    pub val: BTreeMap<String, f64>,
    pub test: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub mode: &'static str,
    pub epochs: Vec<EpochRecord>,
    /// Epoch with the best mean validation score; `None` when no task has a
    /// validation split (then the final epoch is reported).
    pub best_epoch: Option<usize>,
    /// Per-task test metric, each task reported at the epoch of its own best
    /// validation score (falling back to the final epoch for tasks without a
    /// validation split).
    pub reported_test: BTreeMap<String, f64>,
    pub stopped_by_schedule: bool,
}

pub fn train(universe: &Universe, mode: TrainMode, cfg: &TrainConfig) -> (TrainedModel, RunResult) {
    universe.check_namespacing();
    let tasks = &universe.tasks;
    let n_tasks = tasks.len();
    assert!(n_tasks > 0, "universe has no tasks");
    let root = Rng::from_seed(cfg.seed);

    let tom_arch = TomArch {
        ve_dim: cfg.ve_dim,
        hidden: cfg.hidden,
        latent: cfg.latent,
        n_blocks: cfg.n_blocks,
        dropout: cfg.dropout,
    };
    let dr_arch = DrArch {
        hidden: cfg.hidden,
        n_blocks: cfg.n_blocks,
        dropout: cfg.dropout,
    };
    let mut model = match mode {
        TrainMode::Tom => {
            let refs: Vec<&Task> = tasks.iter().collect();
            TrainedModel::Tom(TomModel::build(tom_arch, &refs, cfg.ve_mode, cfg.seed))
        }
        TrainMode::TomStl => TrainedModel::TomStl(
            tasks
                .iter()
                .map(|t| {
                    (
                        t.id.clone(),
                        TomModel::build(tom_arch.clone(), &[t], cfg.ve_mode, cfg.seed),
                    )
                })
                .collect(),
        ),
        TrainMode::DrMtl => {
            let refs: Vec<&Task> = tasks.iter().collect();
            TrainedModel::Dr(DrModel::build(dr_arch, &refs, cfg.seed))
        }
        TrainMode::DrStl => TrainedModel::DrStl(
            tasks
                .iter()
                .map(|t| (t.id.clone(), DrModel::build(dr_arch.clone(), &[t], cfg.seed)))
                .collect(),
        ),
    };
    // One optimizer per independently updated parameter store.
    let mut adams: BTreeMap<String, AdamState> = match &model {
        TrainedModel::Tom(_) | TrainedModel::Dr(_) => {
            std::iter::once((String::new(), AdamState::new(cfg.learning_rate, cfg.weight_decay)))
                .collect()
        }
        TrainedModel::TomStl(map) => map
            .keys()
            .map(|k| (k.clone(), AdamState::new(cfg.learning_rate, cfg.weight_decay)))
            .collect(),
        TrainedModel::DrStl(map) => map
            .keys()
            .map(|k| (k.clone(), AdamState::new(cfg.learning_rate, cfg.weight_decay)))
            .collect(),
    };

    let mut epochs: Vec<EpochRecord> = Vec::new();
    let mut plateau = PlateauState::new();
    let mut stopped = false;
    let mut epoch_loss_sum = 0.0;
    let mut epoch_loss_count = 0u64;

    let mut step = 0u64;
    while step < cfg.steps {
        let sampled: Vec<usize> = if cfg.tasks_per_step == 0 || cfg.tasks_per_step >= n_tasks {
            (0..n_tasks).collect()
        } else {
            root.derive("task_sample", 0, step)
                .index_sample(n_tasks, cfg.tasks_per_step)
        };

        match &mut model {
            TrainedModel::Tom(m) => {
                m.params.zero_grads();
                for &tidx in &sampled {
                    epoch_loss_sum += tom_task_step(m, &tasks[tidx], tidx as u64, step, &root, cfg);
                    epoch_loss_count += 1;
                }
                adams.get_mut("").unwrap().step(&mut m.params);
            }
            TrainedModel::Dr(m) => {
                m.params.zero_grads();
                for &tidx in &sampled {
                    epoch_loss_sum += dr_task_step(m, &tasks[tidx], tidx as u64, step, &root, cfg);
                    epoch_loss_count += 1;
                }
                adams.get_mut("").unwrap().step(&mut m.params);
            }
            TrainedModel::TomStl(map) => {
                for &tidx in &sampled {
                    let task = &tasks[tidx];
                    let m = map.get_mut(&task.id).unwrap();
                    m.params.zero_grads();
                    epoch_loss_sum += tom_task_step(m, task, tidx as u64, step, &root, cfg);
                    epoch_loss_count += 1;
                    adams.get_mut(&task.id).unwrap().step(&mut m.params);
                }
            }
            TrainedModel::DrStl(map) => {
                for &tidx in &sampled {
                    let task = &tasks[tidx];
                    let m = map.get_mut(&task.id).unwrap();
                    m.params.zero_grads();
                    epoch_loss_sum += dr_task_step(m, task, tidx as u64, step, &root, cfg);
                    epoch_loss_count += 1;
                    adams.get_mut(&task.id).unwrap().step(&mut m.params);
                }
            }
        }

        step += 1;
        if step % cfg.steps_per_epoch == 0 || step == cfg.steps {
            let epoch = epochs.len();
            let lr = adams.values().next().unwrap().learning_rate;
            let mut val = BTreeMap::new();
            let mut test = BTreeMap::new();
            for task in tasks {
                let p = model.predictor_for(&task.id);
                if let Some(v) = evaluate(&p, task, SplitKind::Val, cfg.eval_chunk) {
                    val.insert(task.id.clone(), v);
                }
                if let Some(v) = evaluate(&p, task, SplitKind::Test, cfg.eval_chunk) {
                    test.insert(task.id.clone(), v);
                }
            }
            let train_loss = epoch_loss_sum / (epoch_loss_count.max(1) as f64);
            epoch_loss_sum = 0.0;
            epoch_loss_count = 0;
            let val_score = signed_mean(tasks, &val);
            if cfg.verbose {
                eprintln!(
                    "epoch {epoch} step {step} lr {lr:.6} train_loss {train_loss:.6}{}",
                    match val_score {
                        Some(s) => format!(" val_score {s:.6}"),
                        None => String::new(),
                    }
                );
            }
            epochs.push(EpochRecord {
                epoch,
                step,
                learning_rate: lr,
                train_loss,
                val,
                test,
            });
            if let (LrSchedule::Plateau { patience, factor, max_reductions }, Some(score)) =
                (cfg.lr_schedule, val_score)
            {
                match plateau.observe(score, patience, max_reductions) {
                    PlateauAction::Continue => {}
                    PlateauAction::Reduce => {
                        for adam in adams.values_mut() {
                            adam.learning_rate *= factor;
                        }
                    }
                    PlateauAction::Stop => {
                        stopped = true;
                        break;
                    }
                }
            }
        }
    }

    let best_epoch = select_best_epoch(tasks, &epochs);
    let reported_test = per_task_best_test(tasks, &epochs);
    (
        model,
        RunResult {
            mode: mode.as_str(),
            epochs,
            best_epoch,
            reported_test,
            stopped_by_schedule: stopped,
        },
    )
}

/// Mean over tasks of the per-task score, negating metrics where lower is
/// better so that larger always means better.
fn signed_mean(tasks: &[Task], per_task: &BTreeMap<String, f64>) -> Option<f64> {
    let mut sum = 0.0;
    let mut n = 0;
    for task in tasks {
        if let Some(&v) = per_task.get(&task.id) {
            sum += if task.metric.higher_is_better() { v } else { -v };
            n += 1;
        }
    }
    (n > 0).then(|| sum / n as f64)
}

/// Each task's test metric at the epoch of its own best validation score;
/// tasks without validation data report the final epoch.
fn per_task_best_test(tasks: &[Task], epochs: &[EpochRecord]) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for task in tasks {
        let sign = if task.metric.higher_is_better() { 1.0 } else { -1.0 };
        let mut best: Option<(f64, f64)> = None; // (signed val, test)
        let mut last_test = None;
        for e in epochs {
            if let Some(&t) = e.test.get(&task.id) {
                last_test = Some(t);
                if let Some(&v) = e.val.get(&task.id) {
                    if best.map_or(true, |(b, _)| sign * v > b) {
                        best = Some((sign * v, t));
                    }
                }
            }
        }
        if let Some(t) = best.map(|(_, t)| t).or(last_test) {
            out.insert(task.id.clone(), t);
        }
    }
    out
}

fn select_best_epoch(tasks: &[Task], epochs: &[EpochRecord]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, e) in epochs.iter().enumerate() {
        if let Some(score) = signed_mean(tasks, &e.val) {
            if best.map_or(true, |(_, b)| score > b) {
                best = Some((i, score));
            }
        }
    }
    best.map(|(i, _)| i)
}

struct PlateauState {
    best: f64,
    since: usize,
    reductions: usize,
}

enum PlateauAction {
    Continue,
    Reduce,
    Stop,
}

impl PlateauState {
    fn new() -> Self {
        PlateauState {
            best: f64::NEG_INFINITY,
            since: 0,
            reductions: 0,
        }
    }

    fn observe(&mut self, score: f64, patience: usize, max_reductions: usize) -> PlateauAction {
        if score > self.best {
            self.best = score;
            self.since = 0;
            return PlateauAction::Continue;
        }
        self.since += 1;
        if self.since < patience {
            return PlateauAction::Continue;
        }
        self.since = 0;
        if self.reductions < max_reductions {
            self.reductions += 1;
            PlateauAction::Reduce
        } else {
            PlateauAction::Stop
        }
    }
}

fn gather(split: &Split, rows: &[usize], cols: &[usize]) -> Array2<f64> {
    Array2::from_shape_fn((rows.len(), cols.len()), |(r, c)| {
        split.x[[rows[r], cols[c]]]
    })
}

fn batch_rows(task: &Task, tidx: u64, step: u64, root: &Rng, cfg: &TrainConfig) -> Vec<usize> {
    let n = task.train.len();
    assert!(n > 0, "task {:?} has an empty training split", task.id);
    let (b, with_replacement) = cfg.batch_policy.resolve(n);
    let mut rng = root.derive("batch", tidx, step);
    if with_replacement {
        (0..b).map(|_| rng.below(n)).collect()
    } else {
        rng.index_sample(n, b)
    }
}

/// One training contribution for one task: forward, loss, backward.
/// Gradients accumulate into the model's store; the caller steps the
/// optimizer. Returns the loss value.
fn tom_task_step(
    model: &mut TomModel,
    task: &Task,
    tidx: u64,
    step: u64,
    root: &Rng,
    cfg: &TrainConfig,
) -> f64 {
    let rows = batch_rows(task, tidx, step, root, cfg);
    let mut drop_rng = root.derive("dropout", tidx, step);
    match &task.output {
        OutputSpec::Classes { class_vars } => {
            let x = gather(&task.train, &rows, &task.input_idx);
            let labels: Vec<usize> = {
                let all = task.train.labels.as_deref().expect("classification labels");
                rows.iter().map(|&r| all[r]).collect()
            };
            let (scores, tape) = model.forward(
                task,
                &x,
                &task.input_idx,
                class_vars,
                Mode::Train,
                &mut drop_rng,
            );
            let (loss, grad) = match task.loss_kind {
                LossKind::SquaredHinge => squared_hinge_loss(&scores, &labels),
                other => panic!("unsupported loss {other:?} for classification"),
            };
            model.backward(&grad, &tape);
            loss
        }
        OutputSpec::Values { output_idx } => {
            let (observed, targets, y): (Vec<usize>, Vec<String>, Array2<f64>) =
                if task.autoencode {
                    let mut sub_rng = root.derive("subset", tidx, step);
                    let observed = sample_variable_subset(task.value_vars.len(), &mut sub_rng);
                    let all: Vec<usize> = (0..task.value_vars.len()).collect();
                    let y = gather(&task.train, &rows, &all);
                    (observed, task.value_vars.clone(), y)
                } else {
                    let targets = output_idx
                        .iter()
                        .map(|&i| task.value_vars[i].clone())
                        .collect();
                    let y = gather(&task.train, &rows, output_idx);
                    (task.input_idx.clone(), targets, y)
                };
            let x = gather(&task.train, &rows, &observed);
            let (pred, tape) =
                model.forward(task, &x, &observed, &targets, Mode::Train, &mut drop_rng);
            let (loss, grad) = match task.loss_kind {
                LossKind::Mse => mse_loss(&pred, &y),
                LossKind::Bce => bce_loss(&pred, &y),
                LossKind::SquaredHinge => panic!("squared hinge needs class outputs"),
            };
            model.backward(&grad, &tape);
            loss
        }
    }
}

fn dr_task_step(
    model: &mut DrModel,
    task: &Task,
    tidx: u64,
    step: u64,
    root: &Rng,
    cfg: &TrainConfig,
) -> f64 {
    let rows = batch_rows(task, tidx, step, root, cfg);
    let mut drop_rng = root.derive("dropout", tidx, step);
    let x = gather(&task.train, &rows, &task.input_idx);
    let (pred, tape) = model.forward(task, &x, Mode::Train, &mut drop_rng);
    let (loss, grad) = match &task.output {
        OutputSpec::Classes { .. } => {
            let labels: Vec<usize> = {
                let all = task.train.labels.as_deref().expect("classification labels");
                rows.iter().map(|&r| all[r]).collect()
            };
            squared_hinge_loss(&pred, &labels)
        }
        OutputSpec::Values { output_idx } => {
            let y = gather(&task.train, &rows, output_idx);
            match task.loss_kind {
                LossKind::Mse => mse_loss(&pred, &y),
                LossKind::Bce => bce_loss(&pred, &y),
                LossKind::SquaredHinge => panic!("squared hinge needs class outputs"),
            }
        }
    };
    model.backward(&grad, &tape);
    loss
}

/// Minimum training-split size for per-task finetuning.
pub const FINETUNE_MIN_TRAIN: usize = 5000;
/// Epochs of no smoothed-validation improvement before finetuning stops.
pub const FINETUNE_PATIENCE: usize = 100;
/// Window of the moving average applied to the validation score.
pub const FINETUNE_SMA_WINDOW: usize = 10;

/// Continue training a shared model on a single large task with a small
/// learning rate until its smoothed validation score stops improving.
/// Tasks with fewer than [`FINETUNE_MIN_TRAIN`] training rows are skipped.
pub fn finetune_tom(
    model: &mut TomModel,
    task: &Task,
    cfg: &TrainConfig,
    max_epochs: usize,
) -> Vec<EpochRecord> {
    if task.train.len() < FINETUNE_MIN_TRAIN {
        return Vec::new();
    }
    let root = Rng::from_seed(cfg.seed).derive("finetune", 0, 0);
    let mut adam = AdamState::new(1e-4, cfg.weight_decay);
    let mut history: Vec<f64> = Vec::new();
    let mut best_smoothed = f64::NEG_INFINITY;
    let mut since = 0usize;
    let mut records = Vec::new();
    let mut step = 0u64;
    for epoch in 0..max_epochs {
        for _ in 0..cfg.steps_per_epoch {
            model.params.zero_grads();
            let loss = tom_task_step(model, task, 0, step, &root, cfg);
            adam.step(&mut model.params);
            step += 1;
            let _ = loss;
        }
        let p = Predictor::Tom(model);
        let val = evaluate(&p, task, SplitKind::Val, cfg.eval_chunk);
        let test = evaluate(&p, task, SplitKind::Test, cfg.eval_chunk);
        let mut val_map = BTreeMap::new();
        let mut test_map = BTreeMap::new();
        if let Some(v) = val {
            val_map.insert(task.id.clone(), v);
        }
        if let Some(v) = test {
            test_map.insert(task.id.clone(), v);
        }
        records.push(EpochRecord {
            epoch,
            step,
            learning_rate: adam.learning_rate,
            train_loss: f64::NAN,
            val: val_map,
            test: test_map,
        });
        let Some(v) = val else { continue };
        let signed = if task.metric.higher_is_better() { v } else { -v };
        history.push(signed);
        let window = &history[history.len().saturating_sub(FINETUNE_SMA_WINDOW)..];
        let smoothed = window.iter().sum::<f64>() / window.len() as f64;
        if smoothed > best_smoothed {
            best_smoothed = smoothed;
            since = 0;
        } else {
            since += 1;
            if since >= FINETUNE_PATIENCE {
                break;
            }
        }
    }
    records
}
