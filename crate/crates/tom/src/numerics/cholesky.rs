//! Cholesky factorization and Gaussian sampling for Gaussian-process task
//! generation.

use ndarray::Array2;

use super::rng::Rng;

const BASE_JITTER: f64 = 1e-8;
const MAX_JITTER: f64 = 1e-4;

/// Lower-triangular L with L·Lᵀ = K + jitter·I. Jitter starts at 1e-8 and
/// escalates by factors of 10 up to 1e-4 before giving up.
pub fn cholesky_factor(k: &Array2<f64>) -> Array2<f64> {
    let n = k.nrows();
    assert_eq!(n, k.ncols(), "kernel matrix must be square, got {:?}", k.shape());
    for i in 0..n {
        for j in 0..i {
            assert!(
                (k[[i, j]] - k[[j, i]]).abs() < 1e-9,
                "kernel matrix not symmetric at ({i},{j})"
            );
        }
    }
    let mut jitter = BASE_JITTER;
    loop {
        if let Some(l) = try_factor(k, jitter) {
            return l;
        }
        jitter *= 10.0;
        assert!(
            jitter <= MAX_JITTER,
            "cholesky failed after jitter escalation to {MAX_JITTER}"
        );
    }
}

fn try_factor(k: &Array2<f64>, jitter: f64) -> Option<Array2<f64>> {
    let n = k.nrows();
    let mut l = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = k[[i, j]] + if i == j { jitter } else { 0.0 };
            for p in 0..j {
                sum -= l[[i, p]] * l[[j, p]];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[[i, j]] = sum.sqrt();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    Some(l)
}

/// One draw from N(0, K): returns L·ε with ε standard normal.
pub fn cholesky_sample(k: &Array2<f64>, rng: &mut Rng) -> Vec<f64> {
    let l = cholesky_factor(k);
    sample_with_factor(&l, rng)
}

/// Draw using a precomputed factor; generators factor once per task.
pub fn sample_with_factor(l: &Array2<f64>, rng: &mut Rng) -> Vec<f64> {
    let n = l.nrows();
    let eps = rng.normal_vec(n);
    (0..n)
        .map(|i| (0..=i).map(|j| l[[i, j]] * eps[j]).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_kernel_gives_standard_normal_draw() {
        let k = Array2::eye(3);
        let mut rng = Rng::from_seed(1);
        let mut check = rng.clone();
        let s = cholesky_sample(&k, &mut rng);
        // With K = I (+tiny jitter), the draw is the raw normal vector
        // scaled by sqrt(1 + jitter).
        let eps = check.normal_vec(3);
        for (a, b) in s.iter().zip(&eps) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_kernel_gives_near_zero_draw() {
        let k = Array2::zeros((4, 4));
        let mut rng = Rng::from_seed(2);
        let s = cholesky_sample(&k, &mut rng);
        assert!(s.iter().all(|v| v.abs() < 1e-2), "draw {s:?} too large for zero kernel");
    }

    #[test]
    fn sample_covariance_converges_to_kernel() {
        let k = ndarray::array![[1.0, 0.6, 0.2], [0.6, 1.0, 0.5], [0.2, 0.5, 1.0]];
        let l = cholesky_factor(&k);
        let mut rng = Rng::from_seed(3);
        let draws = 10_000;
        let mut cov = Array2::<f64>::zeros((3, 3));
        for _ in 0..draws {
            let s = sample_with_factor(&l, &mut rng);
            for i in 0..3 {
                for j in 0..3 {
                    cov[[i, j]] += s[i] * s[j];
                }
            }
        }
        cov /= draws as f64;
        let diff_frob: f64 = (&cov - &k).iter().map(|d| d * d).sum::<f64>().sqrt();
        let k_frob: f64 = k.iter().map(|d| d * d).sum::<f64>().sqrt();
        assert!(diff_frob / k_frob < 0.10, "relative Frobenius error {}", diff_frob / k_frob);
    }

    #[test]
    fn factor_reconstructs_kernel() {
        let k = ndarray::array![[2.0, 0.5], [0.5, 1.0]];
        let l = cholesky_factor(&k);
        let rec = l.dot(&l.t());
        for i in 0..2 {
            for j in 0..2 {
                assert!((rec[[i, j]] - k[[i, j]]).abs() < 1e-6);
            }
        }
    }

    #[test]
    #[should_panic(expected = "not symmetric")]
    fn asymmetric_kernel_rejected() {
        let k = ndarray::array![[1.0, 0.2], [0.9, 1.0]];
        cholesky_factor(&k);
    }
}
