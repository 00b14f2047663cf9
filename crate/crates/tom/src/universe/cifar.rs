//! Grayscale image task ingestion.
//!
//! The engine consumes a pre-converted flat binary ("TOMD"): magic, format
//! version (u32 LE), sample count (u32 LE), variable count (u32 LE), then
//! row-major little-endian 32-bit floats in [0, 1]. For CIFAR, conversion
//! from the public binary batches is grayscale = 0.299 R + 0.587 G +
//! 0.114 B, divided by 255; the variable count is 1024 (32 x 32).
//!
//! A synthetic surrogate generator is included for desk-scale runs: smooth
//! random fields over the pixel grid with the same spatial-correlation
//! structure that makes grid recovery possible.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use thiserror::Error;

use crate::numerics::cholesky::{cholesky_factor, sample_with_factor};
use crate::numerics::layers::sigmoid;
use crate::numerics::Rng;

use super::task::{
    LossKind, MetricKind, OracleMeta, OutputSpec, Split, Task, Universe, UniverseKind,
};

const MAGIC: &[u8; 4] = b"TOMD";
const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TomdError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed TOMD file at byte offset {offset}: {what}")]
    Malformed { offset: u64, what: String },
}

pub fn write_tomd(path: &Path, data: &Array2<f64>) -> Result<(), TomdError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(data.nrows() as u32).to_le_bytes())?;
    w.write_all(&(data.ncols() as u32).to_le_bytes())?;
    for &v in data.iter() {
        w.write_all(&(v as f32).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_tomd(path: &Path) -> Result<Array2<f64>, TomdError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut offset = 0u64;
    let mut magic = [0u8; 4];
    read_at(&mut r, &mut magic, &mut offset)?;
    if &magic != MAGIC {
        return Err(TomdError::Malformed {
            offset: 0,
            what: format!("expected magic TOMD, found {magic:?}"),
        });
    }
    let version = read_u32(&mut r, &mut offset)?;
    if version != VERSION {
        return Err(TomdError::Malformed {
            offset: 4,
            what: format!("unsupported version {version}"),
        });
    }
    let samples = read_u32(&mut r, &mut offset)? as usize;
    let vars = read_u32(&mut r, &mut offset)? as usize;
    let mut data = Array2::zeros((samples, vars));
    let mut buf = [0u8; 4];
    for i in 0..samples {
        for j in 0..vars {
            let at = offset;
            r.read_exact(&mut buf).map_err(|e| TomdError::Malformed {
                offset: at,
                what: format!("truncated data ({e})"),
            })?;
            offset += 4;
            data[[i, j]] = f64::from(f32::from_le_bytes(buf));
        }
    }
    Ok(data)
}

fn read_at(r: &mut impl Read, buf: &mut [u8], offset: &mut u64) -> Result<(), TomdError> {
    let at = *offset;
    r.read_exact(buf).map_err(|e| TomdError::Malformed {
        offset: at,
        what: format!("truncated header ({e})"),
    })?;
    *offset += buf.len() as u64;
    Ok(())
}

fn read_u32(r: &mut impl Read, offset: &mut u64) -> Result<u32, TomdError> {
    let mut buf = [0u8; 4];
    read_at(r, &mut buf, offset)?;
    Ok(u32::from_le_bytes(buf))
}

/// Load a grayscale image task from a directory holding `train.tomd` and
/// `test.tomd`. Every pixel is both observable and predictable
/// (autoencoding); there is no validation split.
pub fn load_cifar_gray(dir: &Path) -> Result<Universe, TomdError> {
    let train = read_tomd(&dir.join("train.tomd"))?;
    let test = read_tomd(&dir.join("test.tomd"))?;
    let vars = train.ncols();
    if test.ncols() != vars {
        return Err(TomdError::Malformed {
            offset: 12,
            what: format!(
                "train has {vars} variables but test has {}",
                test.ncols()
            ),
        });
    }
    let side = (vars as f64).sqrt() as usize;
    if side * side != vars {
        return Err(TomdError::Malformed {
            offset: 12,
            what: format!("variable count {vars} is not a square grid"),
        });
    }
    for (name, data) in [("train", &train), ("test", &test)] {
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(TomdError::Malformed {
                offset: 16,
                what: format!("{name} value {v} outside [0, 1]"),
            });
        }
    }
    let value_vars: Vec<String> = (0..side)
        .flat_map(|r| (0..side).map(move |c| format!("px{r}_{c}")))
        .collect();
    let n_vars = value_vars.len();
    let task = Task {
        id: "cifar".to_string(),
        value_vars,
        input_idx: (0..n_vars).collect(),
        output: OutputSpec::Values {
            output_idx: (0..n_vars).collect(),
        },
        train: Split {
            x: train,
            labels: None,
        },
        val: Split::empty(n_vars),
        test: Split {
            x: test,
            labels: None,
        },
        loss_kind: LossKind::Bce,
        metric: MetricKind::Bce,
        autoencode: true,
        oracle: Some(OracleMeta::Grid {
            rows: side,
            cols: side,
        }),
    };
    Ok(Universe {
        kind: UniverseKind::Cifar,
        tasks: vec![task],
    })
}

/// Synthetic stand-in for downsampled grayscale images: each sample is a
/// smooth random field over the side x side grid (2-D RBF GP squashed
/// through a logistic), so nearby pixels are strongly correlated.
pub fn generate_cifar_surrogate(
    side: usize,
    n_train: usize,
    n_test: usize,
    seed: u64,
) -> (Array2<f64>, Array2<f64>) {
    let n = side * side;
    let length_scale = side as f64 / 4.0;
    let coords: Vec<(f64, f64)> = (0..side)
        .flat_map(|r| (0..side).map(move |c| (r as f64, c as f64)))
        .collect();
    let kernel = Array2::from_shape_fn((n, n), |(a, b)| {
        let dr = coords[a].0 - coords[b].0;
        let dc = coords[a].1 - coords[b].1;
        (-(dr * dr + dc * dc) / (2.0 * length_scale * length_scale)).exp()
    });
    let factor = cholesky_factor(&kernel);
    let root = Rng::from_seed(seed);
    let draw = |label: u64, count: usize| {
        let mut rng = root.derive("surrogate_images", 0, label);
        let mut x = Array2::zeros((count, n));
        for i in 0..count {
            let field = sample_with_factor(&factor, &mut rng);
            for (j, v) in field.into_iter().enumerate() {
                x[[i, j]] = sigmoid(1.5 * v);
            }
        }
        x
    };
    (draw(0, n_train), draw(1, n_test))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tomd_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.tomd");
        let data = Array2::from_shape_fn((3, 4), |(i, j)| (i * 4 + j) as f64 / 12.0);
        write_tomd(&path, &data).unwrap();
        let back = read_tomd(&path).unwrap();
        assert_eq!(back.shape(), &[3, 4]);
        for (a, b) in data.iter().zip(back.iter()) {
            assert!((a - b).abs() < 1e-7); // f32 storage
        }
    }

    #[test]
    fn truncated_file_reports_byte_offset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.tomd");
        let data = Array2::from_elem((2, 2), 0.5);
        write_tomd(&path, &data).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 2]).unwrap();
        match read_tomd(&path) {
            Err(TomdError::Malformed { offset, .. }) => assert_eq!(offset, 16 + 3 * 4),
            other => panic!("expected malformed error, got {other:?}"),
        }
    }

    #[test]
    fn surrogate_loads_as_grid_task() {
        let dir = tempfile::tempdir().unwrap();
        let (train, test) = generate_cifar_surrogate(4, 20, 10, 1);
        write_tomd(&dir.path().join("train.tomd"), &train).unwrap();
        write_tomd(&dir.path().join("test.tomd"), &test).unwrap();
        let u = load_cifar_gray(dir.path()).unwrap();
        let task = &u.tasks[0];
        assert_eq!(task.value_vars.len(), 16);
        assert_eq!(task.train.len(), 20);
        assert_eq!(task.test.len(), 10);
        assert!(task.val.is_empty());
        assert!(task.train.x.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(matches!(
            task.oracle,
            Some(OracleMeta::Grid { rows: 4, cols: 4 })
        ));
    }

    #[test]
    fn surrogate_neighbors_correlate() {
        let (train, _) = generate_cifar_surrogate(4, 200, 1, 2);
        // Adjacent pixels should be much more correlated than far ones.
        let corr = |a: usize, b: usize| {
            let ca = train.column(a);
            let cb = train.column(b);
            let n = ca.len() as f64;
            let (ma, mb) = (ca.sum() / n, cb.sum() / n);
            let cov: f64 = ca.iter().zip(cb).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / n;
            let va: f64 = ca.iter().map(|x| (x - ma) * (x - ma)).sum::<f64>() / n;
            let vb: f64 = cb.iter().map(|y| (y - mb) * (y - mb)).sum::<f64>() / n;
            cov / (va * vb).sqrt()
        };
        assert!(corr(0, 1) > corr(0, 15));
    }
}
