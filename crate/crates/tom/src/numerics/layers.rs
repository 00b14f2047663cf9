//! Forward/backward passes for the dense building blocks.
//!
//! Each forward returns its output together with whatever cache the matching
//! backward needs. Backward passes accumulate (`+=`) into the gradient
//! buffers of the parameter store, so gradients from several applications of
//! the same layer sum naturally.

use ndarray::Array2;

use super::rng::Rng;
use super::tensor::{ParamId, Params};

/// Train/eval switch for stochastic layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// y = xW + b, row-wise.
pub fn affine_forward(x: &Array2<f64>, params: &Params, w: ParamId, b: ParamId) -> Array2<f64> {
    let wt = params.get(w);
    let bt = params.get(b);
    assert_eq!(
        x.ncols(),
        wt.shape[0],
        "affine {}: input shape {:?} does not match weight shape {:?}",
        wt.name,
        x.shape(),
        wt.shape
    );
    let mut y = x.dot(&wt.as_matrix());
    for mut row in y.rows_mut() {
        for (v, &bv) in row.iter_mut().zip(&bt.values) {
            *v += bv;
        }
    }
    y
}

/// Backward of `affine_forward`. Accumulates grad_W = xᵀ·up and
/// grad_b = column-sum(up); returns grad_x = up·Wᵀ.
pub fn affine_backward(
    upstream: &Array2<f64>,
    x: &Array2<f64>,
    params: &mut Params,
    w: ParamId,
    b: ParamId,
) -> Array2<f64> {
    assert_eq!(
        upstream.nrows(),
        x.nrows(),
        "affine backward: upstream rows {} do not match cached input rows {}",
        upstream.nrows(),
        x.nrows()
    );
    let grad_x = upstream.dot(&params.get(w).as_matrix().t());
    let gw = x.t().dot(upstream);
    {
        let wt = params.get_mut(w);
        let mut gm = wt.grad_matrix_mut();
        gm += &gw;
    }
    {
        let bt = params.get_mut(b);
        for row in upstream.rows() {
            for (g, &u) in bt.grad.iter_mut().zip(row.iter()) {
                *g += u;
            }
        }
    }
    grad_x
}

pub fn relu_forward(x: &Array2<f64>) -> Array2<f64> {
    x.mapv(|v| if v > 0.0 { v } else { 0.0 })
}

/// Backward of ReLU given the forward *output* (positive where input was).
pub fn relu_backward(upstream: &Array2<f64>, y: &Array2<f64>) -> Array2<f64> {
    let mut g = upstream.clone();
    g.zip_mut_with(y, |u, &yv| {
        if yv <= 0.0 {
            *u = 0.0;
        }
    });
    g
}

/// Dropout cache: the per-element keep mask scaled by 1/(1-rate).
#[derive(Debug, Clone)]
pub struct DropoutMask {
    scale: Option<Array2<f64>>,
}

/// Inverted dropout: kept activations are divided by (1-rate) so eval mode is
/// the identity. The mask is drawn from the supplied (already derived) stream.
pub fn dropout_forward(
    x: &Array2<f64>,
    rate: f64,
    mode: Mode,
    rng: &mut Rng,
) -> (Array2<f64>, DropoutMask) {
    assert!(
        (0.0..1.0).contains(&rate),
        "dropout rate {rate} must lie in [0, 1)"
    );
    if mode == Mode::Eval || rate == 0.0 {
        return (x.clone(), DropoutMask { scale: None });
    }
    let keep = 1.0 - rate;
    let scale = Array2::from_shape_fn(x.raw_dim(), |_| {
        if rng.uniform() < keep {
            1.0 / keep
        } else {
            0.0
        }
    });
    (x * &scale, DropoutMask { scale: Some(scale) })
}

pub fn dropout_backward(upstream: &Array2<f64>, mask: &DropoutMask) -> Array2<f64> {
    match &mask.scale {
        None => upstream.clone(),
        Some(s) => upstream * s,
    }
}

/// Numerically stable logistic function, for mapping logits into [0, 1].
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn params_for(w: Vec<f64>, wshape: [usize; 2], b: Vec<f64>) -> (Params, ParamId, ParamId) {
        let mut p = Params::new();
        let bw = b.len();
        let w = p.add("w", &wshape, w);
        let b = p.add("b", &[1, bw], b);
        (p, w, b)
    }

    #[test]
    fn affine_identity_passes_input_through() {
        let (p, w, b) = params_for(vec![1.0, 0.0, 0.0, 1.0], [2, 2], vec![0.0, 0.0]);
        let x = array![[1.0, 2.0]];
        let y = affine_forward(&x, &p, w, b);
        assert_eq!(y, array![[1.0, 2.0]]);
    }

    #[test]
    fn affine_zero_weights_return_bias() {
        let (p, w, b) = params_for(vec![0.0], [1, 1], vec![7.0]);
        let y = affine_forward(&array![[3.0]], &p, w, b);
        assert_eq!(y, array![[7.0]]);
    }

    #[test]
    fn affine_matches_elementwise_loop() {
        let mut rng = Rng::from_seed(11);
        let x = Array2::from_shape_fn((3, 4), |_| rng.normal());
        let wv: Vec<f64> = (0..20).map(|_| rng.normal()).collect();
        let bv: Vec<f64> = (0..5).map(|_| rng.normal()).collect();
        let (p, w, b) = params_for(wv.clone(), [4, 5], bv.clone());
        let y = affine_forward(&x, &p, w, b);
        for i in 0..3 {
            for j in 0..5 {
                let mut acc = bv[j];
                for k in 0..4 {
                    acc += x[[i, k]] * wv[k * 5 + j];
                }
                assert!((y[[i, j]] - acc).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn affine_backward_scalar_chain_rule() {
        // batch=1, in=out=1: x=2, W=3, upstream=5
        let (mut p, w, b) = params_for(vec![3.0], [1, 1], vec![0.0]);
        let x = array![[2.0]];
        let up = array![[5.0]];
        let gx = affine_backward(&up, &x, &mut p, w, b);
        assert_eq!(p.get(w).grad, vec![10.0]);
        assert_eq!(p.get(b).grad, vec![5.0]);
        assert_eq!(gx, array![[15.0]]);
    }

    #[test]
    fn affine_backward_zero_upstream_zero_grads() {
        let (mut p, w, b) = params_for(vec![1.0, 2.0, 3.0, 4.0], [2, 2], vec![0.0, 0.0]);
        let x = array![[1.0, 1.0], [2.0, -1.0]];
        let up = Array2::zeros((2, 2));
        let gx = affine_backward(&up, &x, &mut p, w, b);
        assert!(p.get(w).grad.iter().all(|&g| g == 0.0));
        assert!(p.get(b).grad.iter().all(|&g| g == 0.0));
        assert!(gx.iter().all(|&g| g == 0.0));
    }

    #[test]
    #[should_panic(expected = "does not match weight shape")]
    fn affine_shape_mismatch_panics() {
        let (p, w, b) = params_for(vec![0.0], [1, 1], vec![0.0]);
        affine_forward(&array![[1.0, 2.0]], &p, w, b);
    }

    #[test]
    fn dropout_eval_is_identity() {
        let mut rng = Rng::from_seed(0);
        let x = array![[1.0, -2.0], [0.5, 3.0]];
        for rate in [0.0, 0.3, 0.9] {
            let (y, _) = dropout_forward(&x, rate, Mode::Eval, &mut rng);
            assert_eq!(y, x);
        }
    }

    #[test]
    fn dropout_rate_zero_train_is_identity() {
        let mut rng = Rng::from_seed(0);
        let x = array![[1.0, -2.0]];
        let (y, _) = dropout_forward(&x, 0.0, Mode::Train, &mut rng);
        assert_eq!(y, x);
    }

    #[test]
    fn dropout_preserves_mean_in_expectation() {
        let mut rng = Rng::from_seed(5);
        let n = 100_000;
        let x = Array2::from_elem((1, n), 1.0);
        let (y, _) = dropout_forward(&x, 0.5, Mode::Train, &mut rng);
        let mean = y.sum() / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean {mean} drifted");
    }

    #[test]
    #[should_panic(expected = "must lie in [0, 1)")]
    fn dropout_rate_one_rejected() {
        let mut rng = Rng::from_seed(0);
        dropout_forward(&array![[1.0]], 1.0, Mode::Train, &mut rng);
    }

    #[test]
    fn relu_grad_masks_negative() {
        let x = array![[1.0, -1.0, 0.0]];
        let y = relu_forward(&x);
        assert_eq!(y, array![[1.0, 0.0, 0.0]]);
        let g = relu_backward(&array![[5.0, 5.0, 5.0]], &y);
        assert_eq!(g, array![[5.0, 0.0, 0.0]]);
    }
}
