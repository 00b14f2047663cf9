//! Command-line front end: universe generation, training, evaluation,
//! embedding export, gradient checking, and comparison metrics.
//!
//! Exit codes: 0 success, 1 usage/parse error, 2 runtime error, 3 check
//! failure.

use std::collections::BTreeMap;
use std::error::Error;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use ndarray::Array2;

use crate::model::{micro_grad_check, VeMode};
use crate::numerics::{load_checkpoint, save_checkpoint, Params};
use crate::trainer::{
    evaluate, metadata_json, metric_suite, results_csv, summary_json, train, BatchPolicy,
    LrSchedule, Predictor, ScoreTable, TrainConfig, TrainMode, TrainedModel,
};
use crate::universe::{
    generate_cifar_surrogate, generate_gp_universe, generate_hypersphere_universe,
    load_cifar_gray, load_daily_temperature, load_universe, save_universe, write_synthetic_series,
    write_tomd, GpUniverseConfig, HypersphereUniverseConfig, SplitKind, Universe, UniverseKind,
};

type DynError = Box<dyn Error>;

#[derive(Parser)]
#[command(name = "tom", version, about = "Multi-task learning across task universes with learned variable embeddings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a task universe on disk.
    Gen {
        #[command(subcommand)]
        what: GenCommand,
    },
    /// Train a model on a universe.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a universe.
    Eval(EvalArgs),
    /// Export variable embeddings from a checkpoint as CSV.
    ExportVes(ExportArgs),
    /// Check analytic gradients of a miniature network against finite
    /// differences; exits 3 on failure.
    Gradcheck {
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
    },
    /// Summarize a methods-by-tasks score table (normalized accuracy, mean
    /// rank, best %, win %).
    Metrics {
        /// CSV with header `method,<task>,<task>,...` and one row per method.
        #[arg(long)]
        scores: PathBuf,
        /// Treat smaller scores as better (losses).
        #[arg(long)]
        lower_is_better: bool,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    /// Tasks that regress functions drawn from a shared 1-D Gaussian
    /// process, with every input/output arity combination.
    Gp {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        max_inputs: usize,
        #[arg(long, default_value_t = 10)]
        max_outputs: usize,
    },
    /// Classification tasks on concentric hyperspheres.
    Hyperspheres {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        max_features: usize,
        #[arg(long, default_value_t = 10)]
        max_classes: usize,
    },
    /// Synthetic grayscale image stand-in (smooth random fields on a grid),
    /// written as train.tomd / test.tomd.
    CifarSurrogate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        side: usize,
        #[arg(long, default_value_t = 2000)]
        train: usize,
        #[arg(long, default_value_t = 500)]
        test: usize,
    },
    /// Synthetic daily-temperature CSV (seasonal cycle plus AR(1) noise).
    TemperatureDemo {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        years: usize,
    },
    /// Small multi-task tabular classification universe.
    TabularDemo {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        tasks: usize,
    },
}

#[derive(Args)]
struct CommonRunArgs {
    /// Universe location: a directory with universe.txt, a directory with
    /// train.tomd/test.tomd, or a date,temperature CSV file.
    #[arg(long)]
    data: PathBuf,
    /// tom, tom-stl, dr-mtl, or dr-stl.
    #[arg(long, default_value = "tom")]
    mode: String,
    /// Flat `key = value` config file overriding the universe preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Inline config override, repeatable (e.g. --set steps=1000).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonRunArgs,
    /// Output directory for results, checkpoints, and embeddings.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: CommonRunArgs,
    /// Checkpoint file (shared modes) or directory of per-task checkpoints
    /// (single-task modes).
    #[arg(long)]
    checkpoint: PathBuf,
    /// Split to evaluate: train, val, or test.
    #[arg(long, default_value = "test")]
    split: String,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    common: CommonRunArgs,
    #[arg(long)]
    checkpoint: PathBuf,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Ok(v) = std::env::var("TOM_THREADS") {
        if v.trim().parse::<usize>().map_or(true, |n| n != 1) {
            eprintln!("note: TOM_THREADS={v} requested; compute kernels are single-threaded");
        }
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn dispatch(command: Command) -> Result<i32, DynError> {
    match command {
        Command::Gen { what } => {
            gen(what)?;
            Ok(0)
        }
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::ExportVes(args) => cmd_export_ves(args),
        Command::Gradcheck { tolerance } => Ok(cmd_gradcheck(tolerance)),
        Command::Metrics { scores, lower_is_better } => {
            cmd_metrics(&scores, !lower_is_better)?;
            Ok(0)
        }
    }
}

fn gen(what: GenCommand) -> Result<(), DynError> {
    match what {
        GenCommand::Gp { out, seed, max_inputs, max_outputs } => {
            let config = GpUniverseConfig {
                seed,
                inputs: (1, max_inputs),
                outputs: (1, max_outputs),
                ..GpUniverseConfig::default()
            };
            let u = generate_gp_universe(&config);
            save_universe(&u, &out)?;
            println!("wrote {} tasks to {}", u.tasks.len(), out.display());
        }
        GenCommand::Hyperspheres { out, seed, max_features, max_classes } => {
            let config = HypersphereUniverseConfig {
                seed,
                features: (1, max_features),
                classes: (2, max_classes),
                ..HypersphereUniverseConfig::default()
            };
            let u = generate_hypersphere_universe(&config);
            save_universe(&u, &out)?;
            println!("wrote {} tasks to {}", u.tasks.len(), out.display());
        }
        GenCommand::CifarSurrogate { out, seed, side, train, test } => {
            let (tr, te) = generate_cifar_surrogate(side, train, test, seed);
            std::fs::create_dir_all(&out)?;
            write_tomd(&out.join("train.tomd"), &tr)?;
            write_tomd(&out.join("test.tomd"), &te)?;
            println!(
                "wrote {train}+{test} samples of {side}x{side} to {}",
                out.display()
            );
        }
        GenCommand::TemperatureDemo { out, seed, years } => {
            write_synthetic_series(&out, years, seed)?;
            println!("wrote {years} years of daily temperatures to {}", out.display());
        }
        GenCommand::TabularDemo { out, seed, tasks } => {
            let u = tabular_demo_universe(tasks, seed);
            save_universe(&u, &out)?;
            println!("wrote {} tasks to {}", u.tasks.len(), out.display());
        }
    }
    Ok(())
}

/// Small classification universe used by examples and smoke tests: the
/// lowest-arity concentric-hypersphere tasks, stored in the tabular format.
pub fn tabular_demo_universe(n_tasks: usize, seed: u64) -> Universe {
    let full = generate_hypersphere_universe(&HypersphereUniverseConfig {
        seed,
        features: (1, 3),
        classes: (2, 3),
        ..HypersphereUniverseConfig::default()
    });
    let mut tasks = full.tasks;
    tasks.truncate(n_tasks);
    Universe {
        kind: UniverseKind::Tabular,
        tasks,
    }
}

/// Load a universe from any of the supported on-disk layouts.
pub fn resolve_universe(path: &Path) -> Result<Universe, DynError> {
    if path.is_file() {
        if path.extension().is_some_and(|e| e == "csv") {
            return Ok(load_daily_temperature(path)?);
        }
        return Err(format!("unrecognized universe file {}", path.display()).into());
    }
    if path.join("universe.txt").is_file() {
        return Ok(load_universe(path)?);
    }
    if path.join("train.tomd").is_file() {
        return Ok(load_cifar_gray(path)?);
    }
    Err(format!(
        "no universe at {} (expected universe.txt, train.tomd, or a .csv file)",
        path.display()
    )
    .into())
}

/// Apply one `key=value` override to a training configuration.
pub fn apply_override(cfg: &mut TrainConfig, key: &str, value: &str) -> Result<(), DynError> {
    let key = key.trim().replace('-', "_");
    let value = value.trim();
    let bad = |what: &str| -> DynError { format!("bad value {value:?} for {what}").into() };
    match key.as_str() {
        "steps" => cfg.steps = value.parse().map_err(|_| bad("steps"))?,
        "steps_per_epoch" => {
            cfg.steps_per_epoch = value.parse().map_err(|_| bad("steps_per_epoch"))?
        }
        "tasks_per_step" => cfg.tasks_per_step = value.parse().map_err(|_| bad("tasks_per_step"))?,
        "learning_rate" | "lr" => {
            cfg.learning_rate = value.parse().map_err(|_| bad("learning_rate"))?
        }
        "weight_decay" => cfg.weight_decay = value.parse().map_err(|_| bad("weight_decay"))?,
        "dropout" => cfg.dropout = value.parse().map_err(|_| bad("dropout"))?,
        "ve_dim" => cfg.ve_dim = value.parse().map_err(|_| bad("ve_dim"))?,
        "hidden" => cfg.hidden = value.parse().map_err(|_| bad("hidden"))?,
        "latent" => cfg.latent = value.parse().map_err(|_| bad("latent"))?,
        "n_blocks" => cfg.n_blocks = value.parse().map_err(|_| bad("n_blocks"))?,
        "seed" => cfg.seed = value.parse().map_err(|_| bad("seed"))?,
        "eval_chunk" => cfg.eval_chunk = value.parse().map_err(|_| bad("eval_chunk"))?,
        "verbose" => cfg.verbose = value.parse().map_err(|_| bad("verbose"))?,
        "ve_mode" => cfg.ve_mode = VeMode::from_str(value)?,
        "batch" => cfg.batch_policy = parse_batch_policy(value)?,
        "schedule" => cfg.lr_schedule = parse_schedule(value)?,
        other => return Err(format!("unknown config key {other:?}").into()),
    }
    Ok(())
}

/// `min:<cap>`, `fixed:<n>`, or `max:<floor>`.
fn parse_batch_policy(value: &str) -> Result<BatchPolicy, DynError> {
    let (kind, n) = value
        .split_once(':')
        .ok_or_else(|| format!("bad batch policy {value:?} (want min:N, fixed:N, or max:N)"))?;
    let n: usize = n.parse().map_err(|_| format!("bad batch size in {value:?}"))?;
    match kind {
        "min" => Ok(BatchPolicy::MinCap(n)),
        "fixed" => Ok(BatchPolicy::Fixed(n)),
        "max" => Ok(BatchPolicy::MaxFloor(n)),
        _ => Err(format!("bad batch policy kind {kind:?}").into()),
    }
}

/// `constant` or `plateau:<patience>:<factor>:<max_reductions>`.
fn parse_schedule(value: &str) -> Result<LrSchedule, DynError> {
    if value == "constant" {
        return Ok(LrSchedule::Constant);
    }
    let parts: Vec<&str> = value.split(':').collect();
    if parts.len() == 4 && parts[0] == "plateau" {
        return Ok(LrSchedule::Plateau {
            patience: parts[1].parse()?,
            factor: parts[2].parse()?,
            max_reductions: parts[3].parse()?,
        });
    }
    Err(format!("bad schedule {value:?}").into())
}

/// Parse a flat `key = value` config body (one pair per line, `#` comments).
pub fn parse_config_text(cfg: &mut TrainConfig, text: &str) -> Result<(), DynError> {
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
        apply_override(cfg, key, value).map_err(|e| format!("line {}: {e}", lineno + 1))?;
    }
    Ok(())
}

fn build_config(common: &CommonRunArgs, kind: UniverseKind) -> Result<(TrainMode, TrainConfig), DynError> {
    let mode = TrainMode::from_str(&common.mode)?;
    let mut cfg = TrainConfig::preset(kind);
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)?;
        parse_config_text(&mut cfg, &text)?;
    }
    for pair in &common.sets {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| format!("--set {pair:?}: expected KEY=VALUE"))?;
        apply_override(&mut cfg, key, value)?;
    }
    Ok((mode, cfg))
}

fn checkpoint_params<'a>(model: &'a TrainedModel) -> Vec<(String, &'a Params)> {
    match model {
        TrainedModel::Tom(m) => vec![("checkpoint.tomf".to_string(), &m.params)],
        TrainedModel::Dr(m) => vec![("checkpoint.tomf".to_string(), &m.params)],
        TrainedModel::TomStl(map) => map
            .iter()
            .map(|(k, m)| (format!("checkpoint.{k}.tomf"), &m.params))
            .collect(),
        TrainedModel::DrStl(map) => map
            .iter()
            .map(|(k, m)| (format!("checkpoint.{k}.tomf"), &m.params))
            .collect(),
    }
}

fn cmd_train(args: TrainArgs) -> Result<i32, DynError> {
    let universe = resolve_universe(&args.common.data)?;
    let (mode, cfg) = build_config(&args.common, universe.kind)?;
    std::fs::create_dir_all(&args.out)?;
    std::fs::write(
        args.out.join("metadata.json"),
        metadata_json(&universe, mode.as_str(), &cfg),
    )?;
    let (model, result) = train(&universe, mode, &cfg);
    std::fs::write(args.out.join("results.csv"), results_csv(&universe, &result))?;
    std::fs::write(args.out.join("summary.json"), summary_json(&result))?;
    for (name, params) in checkpoint_params(&model) {
        save_checkpoint(params, &args.out.join(name))?;
    }
    match &model {
        TrainedModel::Tom(m) => {
            std::fs::write(args.out.join("ves.csv"), m.ve.export_csv(&m.params))?;
        }
        TrainedModel::TomStl(map) => {
            let mut csv = String::new();
            for (i, m) in map.values().enumerate() {
                let part = m.ve.export_csv(&m.params);
                if i == 0 {
                    csv.push_str(&part);
                } else if let Some(body) = part.split_once('\n') {
                    csv.push_str(body.1);
                }
            }
            std::fs::write(args.out.join("ves.csv"), csv)?;
        }
        _ => {}
    }
    for (task_id, value) in &result.reported_test {
        println!("{task_id}\t{value}");
    }
    Ok(0)
}

/// Rebuild the model for a universe/config pair and load checkpoints.
fn rebuild(
    universe: &Universe,
    mode: TrainMode,
    cfg: &TrainConfig,
    checkpoint: &Path,
) -> Result<TrainedModel, DynError> {
    // Zero steps: construct the models without any updates.
    let mut zero_cfg = cfg.clone();
    zero_cfg.steps = 0;
    let (mut model, _) = train(universe, mode, &zero_cfg);
    match &mut model {
        TrainedModel::Tom(m) => load_checkpoint(&mut m.params, checkpoint)?,
        TrainedModel::Dr(m) => load_checkpoint(&mut m.params, checkpoint)?,
        TrainedModel::TomStl(map) => {
            for (k, m) in map.iter_mut() {
                load_checkpoint(&mut m.params, &checkpoint.join(format!("checkpoint.{k}.tomf")))?;
            }
        }
        TrainedModel::DrStl(map) => {
            for (k, m) in map.iter_mut() {
                load_checkpoint(&mut m.params, &checkpoint.join(format!("checkpoint.{k}.tomf")))?;
            }
        }
    }
    Ok(model)
}

fn cmd_eval(args: EvalArgs) -> Result<i32, DynError> {
    let universe = resolve_universe(&args.common.data)?;
    let (mode, cfg) = build_config(&args.common, universe.kind)?;
    let split = SplitKind::from_str(&args.split)?;
    let model = rebuild(&universe, mode, &cfg, &args.checkpoint)?;
    for task in &universe.tasks {
        let p = model.predictor_for(&task.id);
        match evaluate(&p, task, split, cfg.eval_chunk) {
            Some(v) => println!("{}\t{v}", task.id),
            None => println!("{}\t(empty split)", task.id),
        }
    }
    Ok(0)
}

fn cmd_export_ves(args: ExportArgs) -> Result<i32, DynError> {
    let universe = resolve_universe(&args.common.data)?;
    let (mode, cfg) = build_config(&args.common, universe.kind)?;
    let model = rebuild(&universe, mode, &cfg, &args.checkpoint)?;
    let csv = match &model {
        TrainedModel::Tom(m) => m.ve.export_csv(&m.params),
        _ => return Err("embedding export requires --mode tom".into()),
    };
    std::fs::write(&args.out, csv)?;
    println!("wrote {}", args.out.display());
    Ok(0)
}

fn cmd_gradcheck(tolerance: f64) -> i32 {
    let report = micro_grad_check(tolerance);
    println!(
        "checked {} coordinates, max relative error {:.3e} (tolerance {:.1e})",
        report.entries.len(),
        report.max_rel_error,
        tolerance
    );
    if report.passed() {
        println!("gradcheck: pass");
        0
    } else {
        for e in report.worst(5) {
            println!(
                "  {} [{}]: analytic {:.6e} numeric {:.6e} rel {:.3e}",
                e.tensor, e.index, e.analytic, e.numeric, e.rel_error
            );
        }
        println!("gradcheck: FAIL");
        3
    }
}

fn cmd_metrics(path: &Path, higher_is_better: bool) -> Result<(), DynError> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty score file")?;
    let tasks: Vec<String> = header.split(',').skip(1).map(|s| s.trim().to_string()).collect();
    let mut methods = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        methods.push(fields.next().unwrap().trim().to_string());
        let row: Result<Vec<f64>, _> = fields.map(|f| f.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| format!("line {}: {e}", lineno + 2))?;
        if row.len() != tasks.len() {
            return Err(format!("line {}: expected {} scores", lineno + 2, tasks.len()).into());
        }
        rows.push(row);
    }
    let scores = Array2::from_shape_fn((methods.len(), tasks.len()), |(m, t)| rows[m][t]);
    let table = ScoreTable {
        methods,
        tasks,
        scores,
        higher_is_better,
    };
    println!("method\tnorm_acc\tmean_rank\tbest%\twin%");
    for s in metric_suite(&table) {
        println!(
            "{}\t{:.2}\t{:.3}\t{:.1}\t{:.1}",
            s.method, s.normalized_accuracy, s.mean_rank, s.best_pct, s.win_pct
        );
    }
    Ok(())
}

/// Evaluate every task of a trained model on one split, keyed by task id.
/// Shared by examples and integration tests.
pub fn evaluate_all(
    model: &TrainedModel,
    universe: &Universe,
    split: SplitKind,
    chunk: usize,
) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for task in &universe.tasks {
        let p: Predictor<'_> = model.predictor_for(&task.id);
        if let Some(v) = evaluate(&p, task, split, chunk) {
            out.insert(task.id.clone(), v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn override_parser_round_trips_presets() {
        let mut cfg = TrainConfig::default();
        apply_override(&mut cfg, "steps", "123").unwrap();
        apply_override(&mut cfg, "lr", "0.01").unwrap();
        apply_override(&mut cfg, "batch", "fixed:32").unwrap();
        apply_override(&mut cfg, "ve_mode", "oracle").unwrap();
        apply_override(&mut cfg, "schedule", "plateau:20:0.5:5").unwrap();
        assert_eq!(cfg.steps, 123);
        assert_eq!(cfg.learning_rate, 0.01);
        assert_eq!(cfg.batch_policy, BatchPolicy::Fixed(32));
        assert_eq!(cfg.ve_mode, VeMode::Oracle);
        assert!(matches!(cfg.lr_schedule, LrSchedule::Plateau { patience: 20, .. }));
        assert!(apply_override(&mut cfg, "bogus", "1").is_err());
    }

    #[test]
    fn config_text_reports_line_numbers() {
        let mut cfg = TrainConfig::default();
        let text = "# comment\nsteps = 10\n\nhidden = 32\n";
        parse_config_text(&mut cfg, text).unwrap();
        assert_eq!(cfg.steps, 10);
        assert_eq!(cfg.hidden, 32);
        let err = parse_config_text(&mut cfg, "steps = ten\n").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn gen_and_train_round_trip_via_cli() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("u");
        let out = dir.path().join("run");
        let code = run([
            "tom", "gen", "tabular-demo", "--tasks", "2",
            "--out", data.to_str().unwrap(),
        ]);
        assert_eq!(code, 0);
        let code = run([
            "tom", "train",
            "--data", data.to_str().unwrap(),
            "--out", out.to_str().unwrap(),
            "--set", "steps=4",
            "--set", "steps_per_epoch=2",
            "--set", "hidden=6",
            "--set", "latent=4",
            "--set", "n_blocks=1",
            "--set", "ve_dim=2",
            "--set", "dropout=0",
            "--set", "schedule=constant",
            "--set", "batch=min:8",
        ]);
        assert_eq!(code, 0);
        assert!(out.join("results.csv").is_file());
        assert!(out.join("summary.json").is_file());
        assert!(out.join("checkpoint.tomf").is_file());
        assert!(out.join("ves.csv").is_file());
        let code = run([
            "tom", "eval",
            "--data", data.to_str().unwrap(),
            "--checkpoint", out.join("checkpoint.tomf").to_str().unwrap(),
            "--set", "hidden=6", "--set", "latent=4", "--set", "n_blocks=1",
            "--set", "ve_dim=2", "--set", "dropout=0", "--set", "schedule=constant",
        ]);
        assert_eq!(code, 0);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["tom", "definitely-not-a-command"]), 1);
        // Runtime errors (missing universe) exit 2.
        assert_eq!(
            run(["tom", "train", "--data", "/nonexistent", "--out", "/tmp/x"]),
            2
        );
    }

    #[test]
    fn metrics_command_reads_score_table() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("scores.csv");
        std::fs::write(&path, "method,t1,t2\nalpha,0.9,0.5\nbeta,0.8,0.7\n").unwrap();
        let code = run(["tom", "metrics", "--scores", path.to_str().unwrap()]);
        assert_eq!(code, 0);
    }
}
