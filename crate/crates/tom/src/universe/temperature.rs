//! Daily-temperature task: sliding windows of 10 consecutive calendar days.
//!
//! Input is a CSV of (date, temperature). Windows spanning a gap in the
//! dates are dropped. The final year of data is withheld for testing, the
//! second-to-last year for validation, and the rest is training data.

use std::path::Path;

use chrono::{Datelike, NaiveDate};
use ndarray::Array2;
use thiserror::Error;

use crate::numerics::Rng;

use super::task::{
    LossKind, MetricKind, OracleMeta, OutputSpec, Split, Task, Universe, UniverseKind,
};

pub const WINDOW: usize = 10;

#[derive(Debug, Error)]
pub enum TemperatureError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{path}:{line}: {what}")]
    Parse {
        path: String,
        line: usize,
        what: String,
    },
    #[error("not enough data: {0} usable windows")]
    TooFewWindows(usize),
}

pub fn load_daily_temperature(path: &Path) -> Result<Universe, TemperatureError> {
    let text = std::fs::read_to_string(path)?;
    let series = parse_series(&text, &path.display().to_string())?;
    build_universe(&series)
}

fn parse_series(
    text: &str,
    path: &str,
) -> Result<Vec<(NaiveDate, f64)>, TemperatureError> {
    let mut series = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.splitn(2, ',');
        let date_str = parts.next().unwrap_or("").trim().trim_matches('"');
        let value_str = parts.next().unwrap_or("").trim().trim_matches('"');
        // Tolerate a single header line.
        if lineno == 0 && NaiveDate::parse_from_str(date_str, "%Y-%m-%d").is_err() {
            continue;
        }
        let date = NaiveDate::parse_from_str(date_str, "%Y-%m-%d").map_err(|e| {
            TemperatureError::Parse {
                path: path.to_string(),
                line: lineno + 1,
                what: format!("bad date {date_str:?}: {e}"),
            }
        })?;
        let value: f64 = value_str.parse().map_err(|e| TemperatureError::Parse {
            path: path.to_string(),
            line: lineno + 1,
            what: format!("bad temperature {value_str:?}: {e}"),
        })?;
        series.push((date, value));
    }
    series.sort_by_key(|(d, _)| *d);
    Ok(series)
}

fn build_universe(series: &[(NaiveDate, f64)]) -> Result<Universe, TemperatureError> {
    // Windows must cover 10 consecutive calendar days; others are dropped.
    let mut windows: Vec<(NaiveDate, Vec<f64>)> = Vec::new();
    for w in series.windows(WINDOW) {
        let consecutive = w
            .windows(2)
            .all(|p| p[1].0 - p[0].0 == chrono::Duration::days(1));
        if consecutive {
            windows.push((w[WINDOW - 1].0, w.iter().map(|(_, v)| *v).collect()));
        }
    }
    if windows.len() < 3 {
        return Err(TemperatureError::TooFewWindows(windows.len()));
    }

    let last_year = windows.iter().map(|(d, _)| d.year()).max().unwrap();
    let to_split = |rows: Vec<&Vec<f64>>| {
        let mut x = Array2::zeros((rows.len(), WINDOW));
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                x[[i, j]] = v;
            }
        }
        Split { x, labels: None }
    };
    let select = |pred: &dyn Fn(i32) -> bool| {
        to_split(
            windows
                .iter()
                .filter(|(d, _)| pred(d.year()))
                .map(|(_, v)| v)
                .collect(),
        )
    };
    let train = select(&|y| y < last_year - 1);
    let val = select(&|y| y == last_year - 1);
    let test = select(&|y| y == last_year);

    let task = Task {
        id: "temperature".to_string(),
        value_vars: (1..=WINDOW).map(|d| format!("t{d}")).collect(),
        input_idx: (0..WINDOW).collect(),
        output: OutputSpec::Values {
            output_idx: (0..WINDOW).collect(),
        },
        train,
        val,
        test,
        loss_kind: LossKind::Mse,
        metric: MetricKind::Rmse,
        autoencode: true,
        oracle: Some(OracleMeta::DayLags),
    };
    Ok(Universe {
        kind: UniverseKind::Temperature,
        tasks: vec![task],
    })
}

/// Write a plausible synthetic daily minimum-temperature series (seasonal
/// cycle plus AR(1) weather noise, degrees Celsius) for offline runs.
pub fn write_synthetic_series(
    path: &Path,
    years: usize,
    seed: u64,
) -> Result<(), std::io::Error> {
    let mut rng = Rng::from_seed(seed).derive("synthetic_temperature", 0, 0);
    let start = NaiveDate::from_ymd_opt(1981, 1, 1).unwrap();
    let mut out = String::from("date,temperature\n");
    let mut noise = 0.0;
    for day in 0..(years * 365) {
        let date = start + chrono::Duration::days(day as i64);
        let phase = day as f64 / 365.25 * std::f64::consts::TAU;
        // Southern-hemisphere seasonality: minimum mid-year.
        let seasonal = 11.0 - 5.5 * (phase - std::f64::consts::PI / 6.0).cos();
        noise = 0.75 * noise + 1.6 * rng.normal();
        let temp = seasonal + noise;
        out.push_str(&format!("{},{:.1}\n", date.format("%Y-%m-%d"), temp));
    }
    std::fs::write(path, out)
}
