//! On-disk task format.
//!
//! A task is a directory holding `meta.txt` (flat `key = value` lines) and
//! three CSVs `train.csv` / `val.csv` / `test.csv`. Classification rows are
//! n feature floats followed by an integer class label; regression rows are
//! one float per value variable. Floats are written in shortest
//! round-trip-exact decimal form, so write/read round-trips are bit-exact.
//!
//! Whole universes are directories of task directories plus a `universe.txt`
//! index, which is what `tom gen` emits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;
use thiserror::Error;

use super::task::{
    LossKind, MetricKind, OracleMeta, OutputSpec, Split, Task, Universe, UniverseKind,
};

#[derive(Debug, Error)]
pub enum TabularError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {what}")]
    Parse {
        path: String,
        line: usize,
        what: String,
    },
    #[error("{path}: missing key {key}")]
    MissingKey { path: String, key: String },
    #[error("{path}:{line}: label {label} out of range for {m} classes")]
    LabelRange {
        path: String,
        line: usize,
        label: usize,
        m: usize,
    },
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> TabularError + '_ {
    move |source| TabularError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn save_task(task: &Task, dir: &Path) -> Result<(), TabularError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut meta = String::new();
    let _ = writeln!(meta, "name = {}", task.id);
    match &task.output {
        OutputSpec::Classes { class_vars } => {
            let _ = writeln!(meta, "kind = classification");
            let _ = writeln!(meta, "n = {}", task.n_inputs());
            let _ = writeln!(meta, "m = {}", class_vars.len());
        }
        OutputSpec::Values { output_idx } => {
            let _ = writeln!(meta, "kind = regression");
            let _ = writeln!(meta, "n = {}", task.n_inputs());
            let _ = writeln!(meta, "m = {}", output_idx.len());
            let _ = writeln!(meta, "vars = {}", task.value_vars.join(" "));
            let _ = writeln!(meta, "inputs = {}", join_idx(&task.input_idx));
            let _ = writeln!(meta, "outputs = {}", join_idx(output_idx));
        }
    }
    let _ = writeln!(meta, "autoencode = {}", task.autoencode);
    let _ = writeln!(meta, "loss = {}", loss_name(task.loss_kind));
    let _ = writeln!(meta, "metric = {}", metric_name(task.metric));
    match &task.oracle {
        Some(OracleMeta::GpLocations(locs)) => {
            let _ = writeln!(meta, "locations = {}", join_f64(locs));
        }
        Some(OracleMeta::HypersphereOrigin(origin)) => {
            let _ = writeln!(meta, "origin = {}", join_f64(origin));
        }
        Some(OracleMeta::Grid { rows, cols }) => {
            let _ = writeln!(meta, "grid = {rows} {cols}");
        }
        Some(OracleMeta::DayLags) => {
            let _ = writeln!(meta, "day_lags = true");
        }
        None => {}
    }
    let meta_path = dir.join("meta.txt");
    std::fs::write(&meta_path, meta).map_err(io_err(&meta_path))?;

    for (name, split) in [
        ("train.csv", &task.train),
        ("val.csv", &task.val),
        ("test.csv", &task.test),
    ] {
        let mut body = String::new();
        for (i, row) in split.x.rows().into_iter().enumerate() {
            let mut line = row.iter().map(|v| format!("{v}")).collect::<Vec<_>>();
            if let Some(labels) = &split.labels {
                line.push(labels[i].to_string());
            }
            body.push_str(&line.join(","));
            body.push('\n');
        }
        let p = dir.join(name);
        std::fs::write(&p, body).map_err(io_err(&p))?;
    }
    Ok(())
}

pub fn load_task(dir: &Path) -> Result<Task, TabularError> {
    let meta_path = dir.join("meta.txt");
    let meta_text = std::fs::read_to_string(&meta_path).map_err(io_err(&meta_path))?;
    let meta = parse_meta(&meta_text);
    let path_str = meta_path.display().to_string();
    let need = |key: &str| {
        meta.get(key).cloned().ok_or_else(|| TabularError::MissingKey {
            path: path_str.clone(),
            key: key.to_string(),
        })
    };
    let name = need("name")?;
    let kind = need("kind")?;
    let n: usize = parse_key(&need("n")?, "n", &path_str)?;
    let m: usize = parse_key(&need("m")?, "m", &path_str)?;
    let classification = kind == "classification";

    let read_split = |file: &str| -> Result<Split, TabularError> {
        let p = dir.join(file);
        let text = std::fs::read_to_string(&p).map_err(io_err(&p))?;
        let cols = if classification {
            n
        } else {
            need("vars")?.split_whitespace().count()
        };
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut labels: Vec<usize> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            let expect = cols + usize::from(classification);
            if fields.len() != expect {
                return Err(TabularError::Parse {
                    path: p.display().to_string(),
                    line: lineno + 1,
                    what: format!("expected {expect} fields, found {}", fields.len()),
                });
            }
            let mut row = Vec::with_capacity(cols);
            for f in &fields[..cols] {
                row.push(f.trim().parse().map_err(|e| TabularError::Parse {
                    path: p.display().to_string(),
                    line: lineno + 1,
                    what: format!("bad float {f:?}: {e}"),
                })?);
            }
            if classification {
                let label: usize =
                    fields[cols].trim().parse().map_err(|e| TabularError::Parse {
                        path: p.display().to_string(),
                        line: lineno + 1,
                        what: format!("bad label {:?}: {e}", fields[cols]),
                    })?;
                if label >= m {
                    return Err(TabularError::LabelRange {
                        path: p.display().to_string(),
                        line: lineno + 1,
                        label,
                        m,
                    });
                }
                labels.push(label);
            }
            rows.push(row);
        }
        let mut x = Array2::zeros((rows.len(), cols));
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                x[[i, j]] = v;
            }
        }
        Ok(Split {
            x,
            labels: classification.then_some(labels),
        })
    };

    let train = read_split("train.csv")?;
    let val = read_split("val.csv")?;
    let test = read_split("test.csv")?;

    let oracle = if let Some(locs) = meta.get("locations") {
        Some(OracleMeta::GpLocations(parse_f64_list(locs, &path_str)?))
    } else if let Some(origin) = meta.get("origin") {
        Some(OracleMeta::HypersphereOrigin(parse_f64_list(origin, &path_str)?))
    } else if let Some(grid) = meta.get("grid") {
        let dims = parse_f64_list(grid, &path_str)?;
        Some(OracleMeta::Grid {
            rows: dims[0] as usize,
            cols: dims[1] as usize,
        })
    } else if meta.contains_key("day_lags") {
        Some(OracleMeta::DayLags)
    } else {
        None
    };

    let autoencode = meta.get("autoencode").map(|v| v == "true").unwrap_or(false);
    let loss_kind = match meta.get("loss").map(String::as_str) {
        Some("mse") => LossKind::Mse,
        Some("bce") => LossKind::Bce,
        _ if classification => LossKind::SquaredHinge,
        Some("squared_hinge") => LossKind::SquaredHinge,
        _ => LossKind::Mse,
    };
    let metric = match meta.get("metric").map(String::as_str) {
        Some("mse") => MetricKind::Mse,
        Some("rmse") => MetricKind::Rmse,
        Some("bce") => MetricKind::Bce,
        Some("accuracy") => MetricKind::Accuracy,
        _ if classification => MetricKind::Accuracy,
        _ => MetricKind::Mse,
    };

    let (value_vars, input_idx, output) = if classification {
        (
            (0..n).map(|i| format!("f{i}")).collect::<Vec<_>>(),
            (0..n).collect(),
            OutputSpec::Classes {
                class_vars: (0..m).map(|c| format!("class{c}")).collect(),
            },
        )
    } else {
        let vars: Vec<String> = need("vars")?
            .split_whitespace()
            .map(String::from)
            .collect();
        let inputs = parse_idx_list(&need("inputs")?, &path_str)?;
        let outputs = parse_idx_list(&need("outputs")?, &path_str)?;
        (vars, inputs, OutputSpec::Values { output_idx: outputs })
    };

    Ok(Task {
        id: name,
        value_vars,
        input_idx,
        output,
        train,
        val,
        test,
        loss_kind,
        metric,
        autoencode,
        oracle,
    })
}

/// Classification-task reader for the documented tabular ingestion format.
pub fn load_tabular_task(dir: &Path) -> Result<Task, TabularError> {
    load_task(dir)
}

pub fn save_universe(universe: &Universe, dir: &Path) -> Result<(), TabularError> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut index = String::new();
    let _ = writeln!(index, "kind = {}", universe_kind_name(universe.kind));
    let _ = writeln!(index, "tasks = {}", universe.tasks.len());
    for task in &universe.tasks {
        let _ = writeln!(index, "task = {}", task.id);
        save_task(task, &dir.join(&task.id))?;
    }
    let p = dir.join("universe.txt");
    std::fs::write(&p, index).map_err(io_err(&p))?;
    Ok(())
}

pub fn load_universe(dir: &Path) -> Result<Universe, TabularError> {
    let p = dir.join("universe.txt");
    let text = std::fs::read_to_string(&p).map_err(io_err(&p))?;
    let mut kind = UniverseKind::Tabular;
    let mut tasks = Vec::new();
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("kind = ") {
            kind = parse_universe_kind(rest.trim());
        } else if let Some(rest) = line.strip_prefix("task = ") {
            tasks.push(load_task(&dir.join(rest.trim()))?);
        }
    }
    Ok(Universe { kind, tasks })
}

fn parse_meta(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter_map(|line| {
            line.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

fn parse_key<T: std::str::FromStr>(v: &str, key: &str, path: &str) -> Result<T, TabularError>
where
    T::Err: std::fmt::Display,
{
    v.parse().map_err(|e| TabularError::Parse {
        path: path.to_string(),
        line: 0,
        what: format!("bad {key} value {v:?}: {e}"),
    })
}

fn parse_f64_list(v: &str, path: &str) -> Result<Vec<f64>, TabularError> {
    v.split_whitespace()
        .map(|f| parse_key(f, "list entry", path))
        .collect()
}

fn parse_idx_list(v: &str, path: &str) -> Result<Vec<usize>, TabularError> {
    v.split_whitespace()
        .map(|f| parse_key(f, "index", path))
        .collect()
}

fn join_f64(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(" ")
}

fn join_idx(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn loss_name(l: LossKind) -> &'static str {
    match l {
        LossKind::Mse => "mse",
        LossKind::Bce => "bce",
        LossKind::SquaredHinge => "squared_hinge",
    }
}

fn metric_name(m: MetricKind) -> &'static str {
    match m {
        MetricKind::Mse => "mse",
        MetricKind::Rmse => "rmse",
        MetricKind::Bce => "bce",
        MetricKind::Accuracy => "accuracy",
    }
}

fn universe_kind_name(k: UniverseKind) -> &'static str {
    match k {
        UniverseKind::TransposedGp => "transposed_gp",
        UniverseKind::Hyperspheres => "hyperspheres",
        UniverseKind::Cifar => "cifar",
        UniverseKind::Temperature => "temperature",
        UniverseKind::Tabular => "tabular",
    }
}

fn parse_universe_kind(s: &str) -> UniverseKind {
    match s {
        "transposed_gp" => UniverseKind::TransposedGp,
        "hyperspheres" => UniverseKind::Hyperspheres,
        "cifar" => UniverseKind::Cifar,
        "temperature" => UniverseKind::Temperature,
        _ => UniverseKind::Tabular,
    }
}
