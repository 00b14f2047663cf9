//! Variable embeddings: the only task-specific parameters in the model.
//!
//! Each (task, variable) pair owns one C-dimensional vector, used on the
//! encoder side when the variable is observed and on the decoder side when
//! it is predicted. Entries are learned (registered in the parameter store,
//! exempt from weight decay) or fixed (zero / random / oracle), in which
//! case they receive no updates.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::numerics::{ParamId, Params, Rng};
use crate::universe::{OracleMeta, OutputSpec, Task};

/// Standard deviation of learned-VE initialization: N(0, 1e-3) read as
/// variance 1e-3.
pub const VE_INIT_STD: f64 = 0.03162277660168379; // sqrt(1e-3)

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VeMode {
    Learned,
    Zero,
    Random,
    Oracle,
}

impl std::str::FromStr for VeMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "learned" => Ok(VeMode::Learned),
            "zero" => Ok(VeMode::Zero),
            "random" => Ok(VeMode::Random),
            "oracle" => Ok(VeMode::Oracle),
            other => Err(format!("unknown VE mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Input,
    Output,
    Both,
}

impl Role {
    fn name(self) -> &'static str {
        match self {
            Role::Input => "input",
            Role::Output => "output",
            Role::Both => "both",
        }
    }
}

#[derive(Debug, Clone)]
enum VeStorage {
    Learned(ParamId),
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone)]
struct VeEntry {
    role: Role,
    mode: VeMode,
    storage: VeStorage,
}

#[derive(Debug, Clone)]
pub struct VariableEmbeddingTable {
    pub dim: usize,
    entries: BTreeMap<(String, String), VeEntry>,
}

impl VariableEmbeddingTable {
    pub fn new(dim: usize) -> Self {
        VariableEmbeddingTable {
            dim,
            entries: BTreeMap::new(),
        }
    }

    /// Register every variable of a task under the given mode.
    pub fn register_task(
        &mut self,
        task: &Task,
        mode: VeMode,
        params: &mut Params,
        rng: &Rng,
    ) {
        let output_names: Vec<String> = task
            .output_var_names()
            .iter()
            .map(|s| s.to_string())
            .collect();
        let input_names: Vec<String> = task
            .input_var_names()
            .iter()
            .map(|s| s.to_string())
            .collect();
        let oracle = (mode == VeMode::Oracle).then(|| {
            task.oracle
                .as_ref()
                .unwrap_or_else(|| panic!("task {} has no ground-truth locations for oracle VEs", task.id))
        });
        for (vi, var) in task.value_vars.iter().enumerate() {
            let is_in = input_names.iter().any(|n| n == var);
            let is_out = output_names.iter().any(|n| n == var);
            let role = match (is_in, is_out) {
                (true, true) => Role::Both,
                (true, false) => Role::Input,
                (false, true) => Role::Output,
                (false, false) => continue,
            };
            let oracle_ve = oracle.map(|o| oracle_value_var(o, task, vi, self.dim));
            self.register(task, var, role, mode, oracle_ve, params, rng);
        }
        if let OutputSpec::Classes { class_vars } = &task.output {
            for (ci, var) in class_vars.iter().enumerate() {
                let oracle_ve = oracle.map(|_| oracle_class(ci, self.dim));
                self.register(task, var, Role::Output, mode, oracle_ve, params, rng);
            }
        }
    }

    fn register(
        &mut self,
        task: &Task,
        var: &str,
        role: Role,
        mode: VeMode,
        oracle_ve: Option<Vec<f64>>,
        params: &mut Params,
        rng: &Rng,
    ) {
        let key = (task.id.clone(), var.to_string());
        let storage = match mode {
            VeMode::Learned => {
                let name = format!("ve.{}.{var}", task.id);
                let mut init = rng.derive(&name, 0, 0);
                let values: Vec<f64> =
                    (0..self.dim).map(|_| VE_INIT_STD * init.normal()).collect();
                let id = params.add(&name, &[self.dim], values);
                params.set_no_decay(id);
                VeStorage::Learned(id)
            }
            VeMode::Zero => VeStorage::Fixed(vec![0.0; self.dim]),
            VeMode::Random => {
                // Standard normal per coordinate, fixed at initialization.
                let mut init = rng.derive(&format!("ve_random.{}.{var}", task.id), 0, 0);
                VeStorage::Fixed(init.normal_vec(self.dim))
            }
            VeMode::Oracle => VeStorage::Fixed(oracle_ve.expect("oracle VE missing")),
        };
        let prev = self.entries.insert(key, VeEntry { role, mode, storage });
        assert!(prev.is_none(), "variable {var} registered twice in task {}", task.id);
    }

    pub fn get(&self, params: &Params, task_id: &str, var: &str) -> Vec<f64> {
        match &self.lookup(task_id, var).storage {
            VeStorage::Learned(id) => params.get(*id).values.clone(),
            VeStorage::Fixed(v) => v.clone(),
        }
    }

    /// Accumulate a gradient contribution; fixed-mode entries ignore it.
    pub fn accumulate_grad(&self, params: &mut Params, task_id: &str, var: &str, grad: &[f64]) {
        if let VeStorage::Learned(id) = &self.lookup(task_id, var).storage {
            for (g, &d) in params.get_mut(*id).grad.iter_mut().zip(grad) {
                *g += d;
            }
        }
    }

    fn lookup(&self, task_id: &str, var: &str) -> &VeEntry {
        self.entries
            .get(&(task_id.to_string(), var.to_string()))
            .unwrap_or_else(|| panic!("unknown variable {var} in task {task_id}"))
    }

    pub fn contains(&self, task_id: &str, var: &str) -> bool {
        self.entries
            .contains_key(&(task_id.to_string(), var.to_string()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// CSV snapshot: task_id, variable_name, role, mode, c0..c{C-1}.
    pub fn export_csv(&self, params: &Params) -> String {
        let mut out = String::from("task_id,variable_name,role,mode");
        for c in 0..self.dim {
            let _ = write!(out, ",c{c}");
        }
        out.push('\n');
        for ((task, var), entry) in &self.entries {
            let mode = match entry.mode {
                VeMode::Learned => "learned",
                VeMode::Zero => "zero",
                VeMode::Random => "random",
                VeMode::Oracle => "oracle",
            };
            let _ = write!(out, "{task},{var},{},{mode}", entry.role.name());
            let values = match &entry.storage {
                VeStorage::Learned(id) => params.get(*id).values.clone(),
                VeStorage::Fixed(v) => v.clone(),
            };
            for v in values {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

fn pad(mut v: Vec<f64>, dim: usize) -> Vec<f64> {
    v.truncate(dim);
    v.resize(dim, 0.0);
    v
}

/// Ground-truth embedding for a value variable.
fn oracle_value_var(oracle: &OracleMeta, task: &Task, var_index: usize, dim: usize) -> Vec<f64> {
    match oracle {
        OracleMeta::GpLocations(locs) => pad(vec![locs[var_index]], dim),
        OracleMeta::HypersphereOrigin(origin) => pad(vec![origin[var_index]], dim),
        OracleMeta::Grid { rows, cols } => {
            let r = var_index / cols;
            let c = var_index % cols;
            let norm = |i: usize, n: usize| {
                if n <= 1 {
                    0.0
                } else {
                    2.0 * i as f64 / (n - 1) as f64 - 1.0
                }
            };
            pad(vec![norm(c, *cols), norm(r, *rows)], dim)
        }
        OracleMeta::DayLags => {
            let lag = var_index + 1;
            let _ = task;
            pad(vec![lag as f64 / 10.0], dim)
        }
    }
}

/// Ground-truth embedding for class c (0-based index): first coordinate
/// (c+1)/10.
fn oracle_class(class_index: usize, dim: usize) -> Vec<f64> {
    pad(vec![(class_index + 1) as f64 / 10.0], dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::universe::{
        generate_gp_universe, generate_hypersphere_universe, GpUniverseConfig,
        HypersphereUniverseConfig,
    };

    #[test]
    fn hypersphere_class_three_maps_to_point_three() {
        let u = generate_hypersphere_universe(&HypersphereUniverseConfig::reduced(2, 4, 0));
        let task = u.tasks.iter().find(|t| t.id == "sphere_2x4").unwrap();
        let mut params = Params::new();
        let mut table = VariableEmbeddingTable::new(2);
        table.register_task(task, VeMode::Oracle, &mut params, &Rng::from_seed(0));
        // class index 2 = third class, radius 3 -> first coordinate 0.3
        let ve = table.get(&params, "sphere_2x4", "class2");
        assert!((ve[0] - 0.3).abs() < 1e-12);
        assert_eq!(ve[1], 0.0);
    }

    #[test]
    fn hypersphere_features_take_origin_coordinates() {
        let u = generate_hypersphere_universe(&HypersphereUniverseConfig::reduced(3, 2, 0));
        let task = u.tasks.iter().find(|t| t.id == "sphere_3x2").unwrap();
        let origin = match task.oracle.as_ref().unwrap() {
            OracleMeta::HypersphereOrigin(o) => o.clone(),
            _ => unreachable!(),
        };
        let mut params = Params::new();
        let mut table = VariableEmbeddingTable::new(2);
        table.register_task(task, VeMode::Oracle, &mut params, &Rng::from_seed(0));
        for (i, &o) in origin.iter().enumerate() {
            let ve = table.get(&params, "sphere_3x2", &format!("f{i}"));
            assert_eq!(ve, vec![o, 0.0]);
        }
    }

    #[test]
    fn gp_variable_location_becomes_padded_ve() {
        let u = generate_gp_universe(&GpUniverseConfig::reduced(2, 2, 0));
        let task = &u.tasks[0];
        let locs = match task.oracle.as_ref().unwrap() {
            OracleMeta::GpLocations(l) => l.clone(),
            _ => unreachable!(),
        };
        let mut params = Params::new();
        let mut table = VariableEmbeddingTable::new(2);
        table.register_task(task, VeMode::Oracle, &mut params, &Rng::from_seed(0));
        let ve = table.get(&params, &task.id, &task.value_vars[0]);
        assert_eq!(ve, vec![locs[0], 0.0]);
    }

    #[test]
    fn grid_corners_map_to_unit_corners() {
        use crate::universe::task::{LossKind, MetricKind, OutputSpec, Split};
        let n = 16;
        let task = Task {
            id: "img".into(),
            value_vars: (0..n).map(|i| format!("px{}_{}", i / 4, i % 4)).collect(),
            input_idx: (0..n).collect(),
            output: OutputSpec::Values {
                output_idx: (0..n).collect(),
            },
            train: Split::empty(n),
            val: Split::empty(n),
            test: Split::empty(n),
            loss_kind: LossKind::Bce,
            metric: MetricKind::Bce,
            autoencode: true,
            oracle: Some(OracleMeta::Grid { rows: 4, cols: 4 }),
        };
        let mut params = Params::new();
        let mut table = VariableEmbeddingTable::new(2);
        table.register_task(&task, VeMode::Oracle, &mut params, &Rng::from_seed(0));
        assert_eq!(table.get(&params, "img", "px0_0"), vec![-1.0, -1.0]);
        assert_eq!(table.get(&params, "img", "px0_3"), vec![1.0, -1.0]);
        assert_eq!(table.get(&params, "img", "px3_0"), vec![-1.0, 1.0]);
        assert_eq!(table.get(&params, "img", "px3_3"), vec![1.0, 1.0]);
    }

    #[test]
    fn zero_mode_entries_are_zero_and_frozen() {
        let u = generate_gp_universe(&GpUniverseConfig::reduced(2, 2, 0));
        let mut params = Params::new();
        let mut table = VariableEmbeddingTable::new(2);
        table.register_task(&u.tasks[0], VeMode::Zero, &mut params, &Rng::from_seed(0));
        let before = params.scalar_count();
        let ve = table.get(&params, &u.tasks[0].id, "in0");
        assert_eq!(ve, vec![0.0, 0.0]);
        table.accumulate_grad(&mut params, &u.tasks[0].id, "in0", &[1.0, 1.0]);
        assert_eq!(params.scalar_count(), before);
        assert_eq!(table.get(&params, &u.tasks[0].id, "in0"), vec![0.0, 0.0]);
    }

    #[test]
    fn learned_init_scale_matches_variance_reading() {
        let u = generate_gp_universe(&GpUniverseConfig::default());
        let mut params = Params::new();
        let mut table = VariableEmbeddingTable::new(2);
        let rng = Rng::from_seed(0);
        for t in &u.tasks {
            table.register_task(t, VeMode::Learned, &mut params, &rng);
        }
        let values: Vec<f64> = params.iter().flat_map(|t| t.values.clone()).collect();
        let n = values.len() as f64;
        let var = values.iter().map(|v| v * v).sum::<f64>() / n;
        assert!(
            (var - 1e-3).abs() < 2e-4,
            "empirical variance {var} far from 1e-3"
        );
        // VEs are exempt from weight decay.
        assert!(params.iter().all(|t| !t.weight_decay));
    }

    #[test]
    #[should_panic(expected = "unknown variable")]
    fn unknown_variable_is_a_hard_error() {
        let table = VariableEmbeddingTable::new(2);
        let params = Params::new();
        table.get(&params, "nope", "missing");
    }
}
