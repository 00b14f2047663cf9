//! Residual blocks with SkipInit: out = x + alpha * branch, with the
//! trainable scalar alpha initialized to 0 so every block is the identity at
//! initialization. FRBs condition their hidden states on a variable
//! embedding through FiLM; CRBs are the same block without conditioning.

use ndarray::Array2;

use crate::numerics::layers::{
    affine_backward, affine_forward, dropout_backward, dropout_forward, relu_backward,
    relu_forward, DropoutMask, Mode,
};
use crate::numerics::{ParamId, Params, Rng};

use super::film::{FilmCache, FilmLayer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    /// FiLM-conditioned residual block.
    Frb,
    /// Unconditioned core residual block.
    Crb,
}

#[derive(Debug, Clone)]
pub struct ResidualBlock {
    pub kind: BlockKind,
    w1: ParamId,
    b1: ParamId,
    w2: ParamId,
    b2: ParamId,
    film1: Option<FilmLayer>,
    film2: Option<FilmLayer>,
    pub alpha: ParamId,
    dim: usize,
}

pub struct BlockCache {
    x: Array2<f64>,
    y1: Array2<f64>,
    f1: Option<FilmCache>,
    d1_mask: DropoutMask,
    h1: Array2<f64>,
    y2: Array2<f64>,
    f2: Option<FilmCache>,
    d2_mask: DropoutMask,
    branch: Array2<f64>,
}

impl ResidualBlock {
    pub fn new(
        name: &str,
        kind: BlockKind,
        dim: usize,
        cond_dim: usize,
        params: &mut Params,
        rng: &Rng,
    ) -> Self {
        let mut affine = |suffix: &str| {
            let wn = format!("{name}.{suffix}.w");
            let bn = format!("{name}.{suffix}.b");
            let w = params.add_fan_in(&wn, &[dim, dim], dim, &mut rng.derive(&wn, 0, 0));
            let b = params.add_fan_in(&bn, &[1, dim], dim, &mut rng.derive(&bn, 0, 0));
            (w, b)
        };
        let (w1, b1) = affine("a1");
        let (w2, b2) = affine("a2");
        let (film1, film2) = match kind {
            BlockKind::Frb => (
                Some(FilmLayer::new(&format!("{name}.film1"), cond_dim, dim, params, rng)),
                Some(FilmLayer::new(&format!("{name}.film2"), cond_dim, dim, params, rng)),
            ),
            BlockKind::Crb => (None, None),
        };
        let alpha = params.add(&format!("{name}.alpha"), &[1], vec![0.0]);
        ResidualBlock {
            kind,
            w1,
            b1,
            w2,
            b2,
            film1,
            film2,
            alpha,
            dim,
        }
    }

    /// Forward over a stacked matrix whose rows form `z.nrows()` groups of
    /// `group_size` rows (CRBs pass no conditioning). Sublayer order is
    /// affine, ReLU, FiLM (FRB only), dropout, twice.
    pub fn forward(
        &self,
        params: &Params,
        x: &Array2<f64>,
        z: Option<(&Array2<f64>, usize)>,
        dropout: f64,
        mode: Mode,
        rng: &mut Rng,
    ) -> (Array2<f64>, BlockCache) {
        debug_assert_eq!(self.kind == BlockKind::Frb, z.is_some());
        let y1 = relu_forward(&affine_forward(x, params, self.w1, self.b1));
        let (m1, f1) = match (&self.film1, z) {
            (Some(film), Some((zs, gs))) => {
                let (m, c) = film.forward_grouped(params, &y1, zs, gs);
                (m, Some(c))
            }
            _ => (y1.clone(), None),
        };
        let (h1, d1_mask) = dropout_forward(&m1, dropout, mode, rng);
        let y2 = relu_forward(&affine_forward(&h1, params, self.w2, self.b2));
        let (m2, f2) = match (&self.film2, z) {
            (Some(film), Some((zs, gs))) => {
                let (m, c) = film.forward_grouped(params, &y2, zs, gs);
                (m, Some(c))
            }
            _ => (y2.clone(), None),
        };
        let (branch, d2_mask) = dropout_forward(&m2, dropout, mode, rng);
        let alpha = params.get(self.alpha).values[0];
        let out = x + &(&branch * alpha);
        (
            out,
            BlockCache {
                x: x.clone(),
                y1,
                f1,
                d1_mask,
                h1,
                y2,
                f2,
                d2_mask,
                branch,
            },
        )
    }

    /// Returns (grad_x, grad_z); grad_z is zero-sized for CRBs.
    pub fn backward(
        &self,
        params: &mut Params,
        upstream: &Array2<f64>,
        cache: &BlockCache,
    ) -> (Array2<f64>, Option<Array2<f64>>) {
        let alpha = params.get(self.alpha).values[0];
        let grad_alpha: f64 = upstream
            .iter()
            .zip(cache.branch.iter())
            .map(|(u, b)| u * b)
            .sum();
        params.get_mut(self.alpha).grad[0] += grad_alpha;

        let branch_up = upstream * alpha;
        let m2_up = dropout_backward(&branch_up, &cache.d2_mask);
        let (y2_up, mut grad_z) = match (&self.film2, &cache.f2) {
            (Some(film), Some(fc)) => {
                let (gh, gz) = film.backward_grouped(params, &m2_up, fc);
                (gh, Some(gz))
            }
            _ => (m2_up, None),
        };
        let t2_up = relu_backward(&y2_up, &cache.y2);
        let h1_up = affine_backward(&t2_up, &cache.h1, params, self.w2, self.b2);
        let m1_up = dropout_backward(&h1_up, &cache.d1_mask);
        let y1_up = match (&self.film1, &cache.f1) {
            (Some(film), Some(fc)) => {
                let (gh, gz) = film.backward_grouped(params, &m1_up, fc);
                if let Some(acc) = &mut grad_z {
                    *acc += &gz;
                }
                gh
            }
            _ => m1_up,
        };
        let t1_up = relu_backward(&y1_up, &cache.y1);
        let x_up = affine_backward(&t1_up, &cache.x, params, self.w1, self.b1);
        (upstream + &x_up, grad_z)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_is_identity_at_init() {
        let mut params = Params::new();
        let rng = Rng::from_seed(2);
        let block = ResidualBlock::new("b", BlockKind::Frb, 4, 2, &mut params, &rng);
        let mut drop_rng = Rng::from_seed(0);
        let x = Array2::from_shape_fn((6, 4), |(i, j)| (i * 4 + j) as f64 - 8.0);
        let z = Array2::from_shape_fn((2, 2), |(i, j)| (i + j) as f64);
        let (out, _) = block.forward(&params, &x, Some((&z, 3)), 0.4, Mode::Eval, &mut drop_rng);
        for (a, b) in out.iter().zip(x.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn crb_is_frb_without_conditioning() {
        let mut params = Params::new();
        let rng = Rng::from_seed(2);
        let block = ResidualBlock::new("b", BlockKind::Crb, 3, 2, &mut params, &rng);
        // Make it non-identity to exercise the branch.
        let aid = block.alpha;
        params.get_mut(aid).values[0] = 0.5;
        let mut drop_rng = Rng::from_seed(0);
        let x = Array2::from_shape_fn((2, 3), |(i, j)| i as f64 - j as f64);
        let (out, cache) = block.forward(&params, &x, None, 0.0, Mode::Eval, &mut drop_rng);
        // out = x + 0.5 * branch
        for ((o, x), b) in out.iter().zip(x.iter()).zip(cache.branch.iter()) {
            assert!((o - (x + 0.5 * b)).abs() < 1e-12);
        }
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut params = Params::new();
        let rng = Rng::from_seed(7);
        let block = ResidualBlock::new("b", BlockKind::Frb, 3, 2, &mut params, &rng);
        let aid = block.alpha;
        params.get_mut(aid).values[0] = 0.3;
        let mut data_rng = Rng::from_seed(8);
        let x = Array2::from_shape_fn((4, 3), |_| data_rng.normal());
        let z = Array2::from_shape_fn((2, 2), |_| data_rng.normal());
        let loss = |params: &Params, x: &Array2<f64>, z: &Array2<f64>| {
            let mut r = Rng::from_seed(0);
            let (out, _) = block.forward(params, x, Some((z, 2)), 0.0, Mode::Eval, &mut r);
            out.iter().map(|v| v * v).sum::<f64>()
        };
        let mut r = Rng::from_seed(0);
        let (out, cache) = block.forward(&params, &x, Some((&z, 2)), 0.0, Mode::Eval, &mut r);
        let upstream = out.mapv(|v| 2.0 * v);
        params.zero_grads();
        let (grad_x, grad_z) = block.backward(&mut params, &upstream, &cache);
        let grad_z = grad_z.unwrap();
        let eps = 1e-6;
        for i in 0..4 {
            for j in 0..3 {
                let mut xp = x.clone();
                xp[[i, j]] += eps;
                let mut xm = x.clone();
                xm[[i, j]] -= eps;
                let num = (loss(&params, &xp, &z) - loss(&params, &xm, &z)) / (2.0 * eps);
                assert!(
                    (grad_x[[i, j]] - num).abs() < 1e-5,
                    "grad_x[{i},{j}] {} vs {num}",
                    grad_x[[i, j]]
                );
            }
        }
        for g in 0..2 {
            for c in 0..2 {
                let mut zp = z.clone();
                zp[[g, c]] += eps;
                let mut zm = z.clone();
                zm[[g, c]] -= eps;
                let num = (loss(&params, &x, &zp) - loss(&params, &x, &zm)) / (2.0 * eps);
                assert!((grad_z[[g, c]] - num).abs() < 1e-5);
            }
        }
        // alpha gradient
        let a0 = params.get(aid).values[0];
        let mut pp = params.clone();
        pp.get_mut(aid).values[0] = a0 + eps;
        let mut pm = params.clone();
        pm.get_mut(aid).values[0] = a0 - eps;
        let num = (loss(&pp, &x, &z) - loss(&pm, &x, &z)) / (2.0 * eps);
        assert!((params.get(aid).grad[0] - num).abs() < 1e-5);
    }
}
