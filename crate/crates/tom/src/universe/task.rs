//! Task and dataset model.
//!
//! A task owns named input/output variables, train/val/test splits, a loss
//! kind, and optional ground-truth metadata from its generating universe.
//! Variable identities are namespaced by task id, so variable sets are
//! disjoint across tasks by construction.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Mse,
    Bce,
    SquaredHinge,
}

/// Metric reported for a task: MSE for the GP universe, RMSE for daily
/// temperature, mean BCE for images, accuracy for classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Mse,
    Rmse,
    Bce,
    Accuracy,
}

impl MetricKind {
    /// Whether larger metric values are better.
    pub fn higher_is_better(self) -> bool {
        matches!(self, MetricKind::Accuracy)
    }
}

/// Ground-truth variable locations, where the generating universe has them.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum OracleMeta {
    /// One 1-D location per value variable, in `value_vars` order.
    GpLocations(Vec<f64>),
    /// Task origin; feature i maps to origin[i], class c to c/10.
    HypersphereOrigin(Vec<f64>),
    /// Pixel variables laid out row-major on a rows x cols grid.
    Grid { rows: usize, cols: usize },
    /// Day-lag variables 1..=n in `value_vars` order.
    DayLags,
}

/// Output side of a task.
#[derive(Debug, Clone)]
pub enum OutputSpec {
    /// Outputs are value columns of the splits (regression / autoencoding).
    Values { output_idx: Vec<usize> },
    /// Outputs are one variable per class; splits carry integer labels.
    Classes { class_vars: Vec<String> },
}

/// One split of data. `x` holds the value variables as columns; `labels` is
/// present for classification tasks.
#[derive(Debug, Clone)]
pub struct Split {
    pub x: Array2<f64>,
    pub labels: Option<Vec<usize>>,
}

impl Split {
    pub fn empty(n_cols: usize) -> Self {
        Split {
            x: Array2::zeros((0, n_cols)),
            labels: None,
        }
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitKind {
    Train,
    Val,
    Test,
}

impl std::str::FromStr for SplitKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(SplitKind::Train),
            "val" => Ok(SplitKind::Val),
            "test" => Ok(SplitKind::Test),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Task {
    pub id: String,
    /// Variables that carry values in the splits (columns of `Split.x`).
    pub value_vars: Vec<String>,
    /// Indices into `value_vars` that are observable inputs.
    pub input_idx: Vec<usize>,
    pub output: OutputSpec,
    pub train: Split,
    pub val: Split,
    pub test: Split,
    pub loss_kind: LossKind,
    pub metric: MetricKind,
    /// Whether training predicts the observed input variables as well,
    /// drawing a random observed subset each step.
    pub autoencode: bool,
    pub oracle: Option<OracleMeta>,
}

impl Task {
    pub fn n_inputs(&self) -> usize {
        self.input_idx.len()
    }

    pub fn n_outputs(&self) -> usize {
        match &self.output {
            OutputSpec::Values { output_idx } => output_idx.len(),
            OutputSpec::Classes { class_vars } => class_vars.len(),
        }
    }

    pub fn input_var_names(&self) -> Vec<&str> {
        self.input_idx
            .iter()
            .map(|&i| self.value_vars[i].as_str())
            .collect()
    }

    pub fn output_var_names(&self) -> Vec<&str> {
        match &self.output {
            OutputSpec::Values { output_idx } => output_idx
                .iter()
                .map(|&i| self.value_vars[i].as_str())
                .collect(),
            OutputSpec::Classes { class_vars } => {
                class_vars.iter().map(|s| s.as_str()).collect()
            }
        }
    }

    /// All distinct variable names of this task: value variables first, then
    /// class variables for classification tasks.
    pub fn all_var_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.value_vars.iter().map(|s| s.as_str()).collect();
        if let OutputSpec::Classes { class_vars } = &self.output {
            names.extend(class_vars.iter().map(|s| s.as_str()));
        }
        names
    }

    pub fn split(&self, kind: SplitKind) -> &Split {
        match kind {
            SplitKind::Train => &self.train,
            SplitKind::Val => &self.val,
            SplitKind::Test => &self.test,
        }
    }

    pub fn class_labels(&self, kind: SplitKind) -> Option<&[usize]> {
        self.split(kind).labels.as_deref()
    }
}

/// Universe flavor, kept with generated task sets for oracle construction
/// and preset resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UniverseKind {
    TransposedGp,
    Hyperspheres,
    Cifar,
    Temperature,
    Tabular,
}

#[derive(Debug, Clone)]
pub struct Universe {
    pub kind: UniverseKind,
    pub tasks: Vec<Task>,
}

impl Universe {
    /// Asserts the task-namespacing invariant: no (task, variable) collision.
    pub fn check_namespacing(&self) {
        let mut seen = std::collections::HashSet::new();
        for task in &self.tasks {
            for name in task.all_var_names() {
                assert!(
                    seen.insert((task.id.clone(), name.to_string())),
                    "variable {name} duplicated within task {}",
                    task.id
                );
            }
        }
    }
}
