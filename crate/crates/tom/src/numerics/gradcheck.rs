//! Finite-difference gradient checker.
//!
//! The subject exposes its parameter store; the closure must zero grads, run
//! a deterministic forward/backward (dropout in eval mode, fixed data), and
//! return the scalar loss. Analytic gradients are then compared coordinate by
//! coordinate against central differences with h = 1e-5.

use super::rng::Rng;
use super::tensor::Params;

const H: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct GradCheckEntry {
    pub tensor: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone)]
pub struct GradCheckReport {
    pub entries: Vec<GradCheckEntry>,
    pub max_rel_error: f64,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.max_rel_error < self.tolerance
    }

    /// Worst offenders, for diagnostics.
    pub fn worst(&self, n: usize) -> Vec<&GradCheckEntry> {
        let mut sorted: Vec<&GradCheckEntry> = self.entries.iter().collect();
        sorted.sort_by(|a, b| b.rel_error.total_cmp(&a.rel_error));
        sorted.truncate(n);
        sorted
    }
}

/// Check every coordinate, or a per-tensor random sample when
/// `coords_per_tensor` is set (large models).
pub fn grad_check<S>(
    subject: &mut S,
    mut loss_and_grad: impl FnMut(&mut S) -> f64,
    params_of: impl Fn(&mut S) -> &mut Params,
    tolerance: f64,
    coords_per_tensor: Option<usize>,
    sample_rng: &mut Rng,
) -> GradCheckReport {
    loss_and_grad(subject);
    let analytic: Vec<(String, Vec<f64>)> = params_of(subject)
        .iter()
        .map(|t| (t.name.clone(), t.grad.clone()))
        .collect();

    let mut entries = Vec::new();
    for (ti, (name, grads)) in analytic.iter().enumerate() {
        let coords: Vec<usize> = match coords_per_tensor {
            Some(k) if grads.len() > k => {
                sample_rng.index_sample(grads.len(), k)
            }
            _ => (0..grads.len()).collect(),
        };
        for ci in coords {
            let original = {
                let p = params_of(subject);
                let v = p.iter_mut().nth(ti).unwrap();
                let orig = v.values[ci];
                v.values[ci] = orig + H;
                orig
            };
            let plus = loss_and_grad(subject);
            {
                let p = params_of(subject);
                p.iter_mut().nth(ti).unwrap().values[ci] = original - H;
            }
            let minus = loss_and_grad(subject);
            {
                let p = params_of(subject);
                p.iter_mut().nth(ti).unwrap().values[ci] = original;
            }
            let numeric = (plus - minus) / (2.0 * H);
            let analytic_g = grads[ci];
            let denom = analytic_g.abs().max(numeric.abs()).max(1e-8);
            entries.push(GradCheckEntry {
                tensor: name.clone(),
                index: ci,
                analytic: analytic_g,
                numeric,
                rel_error: (analytic_g - numeric).abs() / denom,
            });
        }
    }
    // Leave the analytic grads in place for the caller.
    loss_and_grad(subject);
    let max_rel_error = entries.iter().map(|e| e.rel_error).fold(0.0, f64::max);
    GradCheckReport {
        entries,
        max_rel_error,
        tolerance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::layers::{affine_backward, affine_forward};
    use crate::numerics::loss::mse_loss;
    use crate::numerics::tensor::ParamId;
    use ndarray::Array2;

    #[test]
    fn quadratic_loss_gradient_is_exact() {
        // loss = 0.5 * ||p||^2, analytic grad = p
        let mut params = Params::new();
        params.add("p", &[4], vec![0.3, -1.2, 0.0, 2.5]);
        let loss = |p: &mut Params| {
            p.zero_grads();
            let t = p.iter_mut().next().unwrap();
            let l = 0.5 * t.values.iter().map(|v| v * v).sum::<f64>();
            t.grad.copy_from_slice(&t.values.clone());
            l
        };
        let mut rng = Rng::from_seed(0);
        let report = grad_check(&mut params, loss, |p| p, 1e-10, None, &mut rng);
        assert!(report.passed(), "max rel error {}", report.max_rel_error);
    }

    struct Micro {
        params: Params,
        w: ParamId,
        b: ParamId,
        x: Array2<f64>,
        y: Array2<f64>,
    }

    #[test]
    fn affine_mse_micro_model_passes_at_1e6() {
        let mut rng = Rng::from_seed(9);
        let mut params = Params::new();
        let w = params.add_fan_in("w", &[3, 2], 3, &mut rng);
        let b = params.add_fan_in("b", &[1, 2], 3, &mut rng);
        let x = Array2::from_shape_fn((4, 3), |_| rng.normal());
        let y = Array2::from_shape_fn((4, 2), |_| rng.normal());
        let mut m = Micro { params, w, b, x, y };
        let loss = |m: &mut Micro| {
            m.params.zero_grads();
            let pred = affine_forward(&m.x, &m.params, m.w, m.b);
            let (l, grad) = mse_loss(&pred, &m.y);
            affine_backward(&grad, &m.x, &mut m.params, m.w, m.b);
            l
        };
        let mut sample_rng = Rng::from_seed(0);
        let report = grad_check(&mut m, loss, |m| &mut m.params, 1e-6, None, &mut sample_rng);
        assert!(report.passed(), "max rel error {}", report.max_rel_error);
    }
}
