//! Seeded generators for the randomized sweeps.
//!
//! Every stream is a SplitMix64 generator seeded from `(seed, label)`, so two
//! call sites never share state and a trial is reproducible from its seed alone.

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::linalg::{qr_unitary, Matrix, C64};

/// Mixes a textual label into a seed (FNV-1a over the label bytes).
pub fn derive_seed(seed: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    seed ^ h
}

/// Per-trial seed of a sweep; independent of execution order.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    seed ^ trial
}

#[derive(Clone, Debug)]
pub struct Stream(SplitMix64);

impl Stream {
    pub fn new(seed: u64, label: &str) -> Self {
        Self(SplitMix64::seed_from_u64(derive_seed(seed, label)))
    }

    /// Uniform on `[-1, 1]`.
    pub fn uniform(&mut self) -> f64 {
        self.0.gen_range(-1.0..=1.0)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        self.0.gen_range(lo..=hi)
    }

    pub fn complex(&mut self) -> C64 {
        let re = self.uniform();
        C64::new(re, self.uniform())
    }

    pub fn sign(&mut self) -> f64 {
        if self.0.gen_bool(0.5) {
            1.0
        } else {
            -1.0
        }
    }

    pub fn index(&mut self, upper: usize) -> usize {
        self.0.gen_range(0..upper)
    }

    /// Square matrix with i.i.d. uniform complex entries.
    pub fn matrix(&mut self, n: usize) -> Matrix {
        Matrix::from_fn(n, n, |_, _| self.complex())
    }

    /// `scale * (M + M^H) / 2` for a uniform complex `M`.
    pub fn hermitian(&mut self, n: usize, scale: f64) -> Matrix {
        self.matrix(n).hermitian_part().scale_real(scale)
    }

    /// Unitary factor of the QR decomposition of a uniform complex matrix.
    pub fn unitary(&mut self, n: usize) -> Matrix {
        loop {
            if let Ok(q) = qr_unitary(&self.matrix(n)) {
                return q;
            }
        }
    }

    pub fn vector(&mut self, n: usize) -> Vec<C64> {
        (0..n).map(|_| self.complex()).collect()
    }

    pub fn real_vector(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.uniform()).collect()
    }

    /// Uniform complex vector scaled to unit euclidean norm.
    pub fn unit_vector(&mut self, n: usize) -> Vec<C64> {
        loop {
            let v = self.vector(n);
            let nv = crate::linalg::norm(&v);
            if nv > 1e-3 {
                return v.iter().map(|z| z / nv).collect();
            }
        }
    }
}
