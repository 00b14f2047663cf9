//! Deterministic random number generation with derivable substreams.
//!
//! Every source of randomness in the engine flows through [`Rng`], a ChaCha8
//! stream seeded from a 64-bit master seed. Substreams are derived by mixing
//! a purpose label, a task index, and a step counter into the master seed, so
//! any component can obtain an independent stream without coordinating with
//! the rest of the program. Identical seed and call sequence produce identical
//! outputs on every platform.

use rand::{Rng as _, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// splitmix64 finalizer, used to mix derivation keys into seed material.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seeded random stream. Cheap to derive, cheap to clone.
#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn from_seed(seed: u64) -> Self {
        Rng {
            seed,
            inner: ChaCha8Rng::from_seed(expand_key(seed)),
        }
    }

    /// Master seed this stream was created from (pre-derivation).
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derive an independent substream keyed by (label, task, step).
    pub fn derive(&self, label: &str, task: u64, step: u64) -> Rng {
        let mut s = self.seed;
        for &b in label.as_bytes() {
            s = splitmix64(s ^ u64::from(b));
        }
        s = splitmix64(s ^ task);
        s = splitmix64(s ^ step);
        Rng {
            seed: s,
            inner: ChaCha8Rng::from_seed(expand_key(s)),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    /// Uniform in [lo, hi).
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in [0, n).
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    /// Standard normal draw.
    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Fill a fresh vector with standard normal draws.
    pub fn normal_vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.normal()).collect()
    }

    /// Draw k distinct indices from 0..n without replacement, returned sorted.
    pub fn index_sample(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n, "cannot draw {k} distinct indices from 0..{n}");
        // Partial Fisher-Yates over an index vector.
        let mut idx: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            idx.swap(i, j);
        }
        idx.truncate(k);
        idx.sort_unstable();
        idx
    }
}

fn expand_key(seed: u64) -> [u8; 32] {
    let mut key = [0u8; 32];
    let mut s = seed;
    for chunk in key.chunks_exact_mut(8) {
        s = splitmix64(s);
        chunk.copy_from_slice(&s.to_le_bytes());
    }
    key
}
