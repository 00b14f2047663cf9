//! Feature-wise linear modulation: per-layer scale and shift of a hidden
//! state computed from a conditioning vector by two affine maps.

use ndarray::{Array2, ArrayView2};

use crate::numerics::layers::{affine_backward, affine_forward};
use crate::numerics::{ParamId, Params, Rng};

#[derive(Debug, Clone)]
pub struct FilmLayer {
    pub w_scale: ParamId,
    pub b_scale: ParamId,
    pub w_shift: ParamId,
    pub b_shift: ParamId,
    pub cond_dim: usize,
    pub dim: usize,
}

/// Cache for one grouped application: rows of the modulated matrix are laid
/// out in `groups` contiguous blocks of `group_size` rows, each block
/// conditioned on one row of `z`.
#[derive(Debug, Clone)]
pub struct FilmCache {
    z: Array2<f64>,
    h: Array2<f64>,
    gammas: Array2<f64>,
    group_size: usize,
}

impl FilmLayer {
    pub fn new(name: &str, cond_dim: usize, dim: usize, params: &mut Params, rng: &Rng) -> Self {
        let mut init = |suffix: &str, shape: &[usize], fan_in: usize| {
            let full = format!("{name}.{suffix}");
            let mut r = rng.derive(&full, 0, 0);
            params.add_fan_in(&full, shape, fan_in, &mut r)
        };
        FilmLayer {
            w_scale: init("w_scale", &[cond_dim, dim], cond_dim),
            b_scale: init("b_scale", &[1, dim], cond_dim),
            w_shift: init("w_shift", &[cond_dim, dim], cond_dim),
            b_shift: init("b_shift", &[1, dim], cond_dim),
            cond_dim,
            dim,
        }
    }

    /// Modulate `h` whose rows form `z.nrows()` groups of `group_size` rows:
    /// row r belongs to group r / group_size and is transformed as
    /// scale(z) ⊙ h + shift(z).
    pub fn forward_grouped(
        &self,
        params: &Params,
        h: &Array2<f64>,
        z: &Array2<f64>,
        group_size: usize,
    ) -> (Array2<f64>, FilmCache) {
        let groups = z.nrows();
        assert_eq!(
            h.nrows(),
            groups * group_size,
            "film: {} rows cannot form {groups} groups of {group_size}",
            h.nrows()
        );
        assert_eq!(z.ncols(), self.cond_dim);
        let gammas = affine_forward(z, params, self.w_scale, self.b_scale);
        let betas = affine_forward(z, params, self.w_shift, self.b_shift);
        let mut out = h.clone();
        for g in 0..groups {
            let gamma = gammas.row(g);
            let beta = betas.row(g);
            for r in g * group_size..(g + 1) * group_size {
                for c in 0..self.dim {
                    out[[r, c]] = gamma[c] * out[[r, c]] + beta[c];
                }
            }
        }
        (
            out,
            FilmCache {
                z: z.clone(),
                h: h.clone(),
                gammas,
                group_size,
            },
        )
    }

    /// Returns (grad_h, grad_z).
    pub fn backward_grouped(
        &self,
        params: &mut Params,
        upstream: &Array2<f64>,
        cache: &FilmCache,
    ) -> (Array2<f64>, Array2<f64>) {
        let groups = cache.z.nrows();
        let gs = cache.group_size;
        let mut grad_h = upstream.clone();
        let mut grad_gamma = Array2::zeros((groups, self.dim));
        let mut grad_beta = Array2::zeros((groups, self.dim));
        for g in 0..groups {
            for r in g * gs..(g + 1) * gs {
                for c in 0..self.dim {
                    let u = upstream[[r, c]];
                    grad_gamma[[g, c]] += u * cache.h[[r, c]];
                    grad_beta[[g, c]] += u;
                    grad_h[[r, c]] = u * cache.gammas[[g, c]];
                }
            }
        }
        let gz_scale = affine_backward(&grad_gamma, &cache.z, params, self.w_scale, self.b_scale);
        let gz_shift = affine_backward(&grad_beta, &cache.z, params, self.w_shift, self.b_shift);
        (grad_h, gz_scale + gz_shift)
    }
}

/// Single-conditioner form: F(h) = scale(z) ⊙ h + shift(z), broadcast over
/// the batch.
pub fn film_modulate(
    h: &Array2<f64>,
    z: &[f64],
    layer: &FilmLayer,
    params: &Params,
) -> Array2<f64> {
    let batch = h.nrows();
    let z = ArrayView2::from_shape((1, z.len()), z).unwrap().to_owned();
    // One group covering the whole batch.
    let (out, _) = layer.forward_grouped(params, h, &z, batch);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn layer_with(
        params: &mut Params,
        cond: usize,
        dim: usize,
        scale_w: f64,
        scale_b: f64,
        shift_w: f64,
        shift_b: f64,
    ) -> FilmLayer {
        FilmLayer {
            w_scale: params.add("ws", &[cond, dim], vec![scale_w; cond * dim]),
            b_scale: params.add("bs", &[1, dim], vec![scale_b; dim]),
            w_shift: params.add("wh", &[cond, dim], vec![shift_w; cond * dim]),
            b_shift: params.add("bh", &[1, dim], vec![shift_b; dim]),
            cond_dim: cond,
            dim,
        }
    }

    #[test]
    fn identity_modulation() {
        // scale == 1 (weights 0, bias 1), shift == 0 -> F(h) = h
        let mut params = Params::new();
        let layer = layer_with(&mut params, 2, 3, 0.0, 1.0, 0.0, 0.0);
        let h = array![[1.0, -2.0, 0.5], [0.0, 4.0, -1.0]];
        let out = film_modulate(&h, &[0.7, -0.3], &layer, &params);
        assert_eq!(out, h);
    }

    #[test]
    fn zero_state_returns_shift() {
        let mut params = Params::new();
        let layer = layer_with(&mut params, 1, 2, 1.0, 0.0, 2.0, 0.5);
        let h = Array2::zeros((2, 2));
        let out = film_modulate(&h, &[1.5], &layer, &params);
        // shift(z) = 2.0 * 1.5 + 0.5 = 3.5 in every coordinate
        assert!(out.iter().all(|&v| (v - 3.5).abs() < 1e-12));
    }

    #[test]
    fn matches_elementwise_oracle() {
        let mut rng = Rng::from_seed(21);
        let mut params = Params::new();
        let layer = FilmLayer::new("film", 2, 3, &mut params, &Rng::from_seed(3));
        let h = Array2::from_shape_fn((4, 3), |_| rng.normal());
        let z = vec![rng.normal(), rng.normal()];
        let out = film_modulate(&h, &z, &layer, &params);
        let ws = params.get(layer.w_scale).as_matrix().to_owned();
        let bs = params.get(layer.b_scale).values.clone();
        let wh = params.get(layer.w_shift).as_matrix().to_owned();
        let bh = params.get(layer.b_shift).values.clone();
        for i in 0..4 {
            for c in 0..3 {
                let gamma = z[0] * ws[[0, c]] + z[1] * ws[[1, c]] + bs[c];
                let beta = z[0] * wh[[0, c]] + z[1] * wh[[1, c]] + bh[c];
                let expect = gamma * h[[i, c]] + beta;
                assert!((out[[i, c]] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn grouped_backward_matches_finite_differences() {
        let mut params = Params::new();
        let layer = FilmLayer::new("film", 2, 3, &mut params, &Rng::from_seed(5));
        let mut rng = Rng::from_seed(6);
        let h = Array2::from_shape_fn((4, 3), |_| rng.normal());
        let z = Array2::from_shape_fn((2, 2), |_| rng.normal());
        // loss = sum of squares of the output
        let loss = |params: &Params, h: &Array2<f64>, z: &Array2<f64>| {
            let mut l = layer.clone();
            l.cond_dim = 2;
            let (out, _) = l.forward_grouped(params, h, z, 2);
            out.iter().map(|v| v * v).sum::<f64>()
        };
        let (out, cache) = layer.forward_grouped(&params, &h, &z, 2);
        let upstream = out.mapv(|v| 2.0 * v);
        let (grad_h, grad_z) = layer.backward_grouped(&mut params, &upstream, &cache);
        let eps = 1e-6;
        for i in 0..4 {
            for c in 0..3 {
                let mut hp = h.clone();
                hp[[i, c]] += eps;
                let mut hm = h.clone();
                hm[[i, c]] -= eps;
                let num = (loss(&params, &hp, &z) - loss(&params, &hm, &z)) / (2.0 * eps);
                assert!((grad_h[[i, c]] - num).abs() < 1e-5);
            }
        }
        for g in 0..2 {
            for c in 0..2 {
                let mut zp = z.clone();
                zp[[g, c]] += eps;
                let mut zm = z.clone();
                zm[[g, c]] -= eps;
                let num = (loss(&params, &h, &zp) - loss(&params, &h, &zm)) / (2.0 * eps);
                assert!((grad_z[[g, c]] - num).abs() < 1e-5);
            }
        }
    }
}
