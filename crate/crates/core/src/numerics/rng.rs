use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::linalg::{SymMat2, Vec2};
use crate::Result;

/// A reproducible random stream.
///
/// `(master_seed, stream_id)` fully determines the sequence, so parallel
/// workers that each own the stream for their work item produce the same
/// numbers regardless of scheduling. Distinct stream ids select disjoint
/// ChaCha keystreams.
#[derive(Debug, Clone)]
pub struct RngStream {
    inner: ChaCha8Rng,
}

/// Convenience constructor for [`RngStream::new`].
pub fn rng_stream(master_seed: u64, stream_id: u64) -> RngStream {
    RngStream::new(master_seed, stream_id)
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_id);
        Self { inner }
    }

    /// Uniform deviate on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform deviate on `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// `exp` of a uniform deviate on `[ln lo, ln hi)`.
    pub fn log_uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        libm::exp(self.uniform_in(libm::log(lo), libm::log(hi)))
    }

    /// Uniform 64-bit word, e.g. to seed a derived stream.
    pub fn next_seed(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Standard normal deviate.
    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Draw from `N(mean, cov)`.
    pub fn gaussian2(&mut self, mean: Vec2, cov: &SymMat2) -> Result<Vec2> {
        let chol = cov.cholesky()?;
        Ok(self.gaussian2_chol(mean, chol))
    }

    /// Draw from `N(mean, L Lᵀ)` given the factor from [`SymMat2::cholesky`].
    pub fn gaussian2_chol(&mut self, mean: Vec2, chol: (f64, f64, f64)) -> Vec2 {
        let (l11, l21, l22) = chol;
        let z1 = self.normal();
        let z2 = self.normal();
        Vec2::new(mean.x + l11 * z1, mean.y + l21 * z1 + l22 * z2)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
