//! Reproducible Gaussian sampling.
//!
//! Every trial draws from its own ChaCha8 stream selected by `(seed, stream_id)`,
//! so results do not depend on how trials are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::MatrixR;

/// Name recorded in run metadata.
pub const GENERATOR: &str = "chacha8-polar";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngState {
    pub seed: u64,
    pub stream_id: u64,
}

impl RngState {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn generator(&self) -> GaussianSource {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        GaussianSource { rng, spare: None }
    }
}

/// Standard normal variates by the Marsaglia polar method.
pub struct GaussianSource {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianSource {
    pub fn next_normal(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        loop {
            let u: f64 = self.rng.gen_range(-1.0..1.0);
            let v: f64 = self.rng.gen_range(-1.0..1.0);
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let factor = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * factor);
                return u * factor;
            }
        }
    }

    /// `n x n` matrix with i.i.d. N(0, 1) entries, filled row by row.
    pub fn gaussian_matrix(&mut self, n: usize) -> MatrixR {
        let data = (0..n * n).map(|_| self.next_normal()).collect();
        MatrixR::from_row_major(n, data).expect("normal variates are finite")
    }

    pub fn gaussian_vector(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.next_normal()).collect()
    }
}

pub fn sample_gaussian_matrix(n: usize, state: RngState) -> MatrixR {
    state.generator().gaussian_matrix(n)
}
