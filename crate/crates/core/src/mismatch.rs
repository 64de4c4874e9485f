//! Seeded per-branch gain/offset perturbations.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::family::ShapeFamily;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MismatchSpec {
    /// Relative standard deviation of branch gains.
    pub gain_sigma: f64,
    /// Standard deviation of branch offsets, in input units.
    pub offset_sigma: f64,
    pub seed: u64,
}

impl MismatchSpec {
    pub fn new(gain_sigma: f64, offset_sigma: f64, seed: u64) -> Result<Self> {
        let spec = Self { gain_sigma, offset_sigma, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gain_sigma >= 0.0 && self.gain_sigma.is_finite()) {
            return Err(invalid("gain_sigma must be finite and >= 0"));
        }
        if !(self.offset_sigma >= 0.0 && self.offset_sigma.is_finite()) {
            return Err(invalid("offset_sigma must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.gain_sigma == 0.0 && self.offset_sigma == 0.0
    }

    /// Same sigmas, different stream.
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// Draws `branch_count` perturbed copies of `base`. Gains follow
/// `Normal(1, gain_sigma)` truncated to positive values by rejection.
pub fn sample_mismatch(base: ShapeFamily, spec: MismatchSpec, branch_count: usize) -> Result<Vec<ShapeFamily>> {
    spec.validate()?;
    if branch_count == 0 {
        return Err(invalid("branch_count must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    sample_with(base, spec, branch_count, &mut rng)
}

pub(crate) fn sample_with<R: rand::Rng + ?Sized>(
    base: ShapeFamily,
    spec: MismatchSpec,
    branch_count: usize,
    rng: &mut R,
) -> Result<Vec<ShapeFamily>> {
    let gains = Normal::new(1.0, spec.gain_sigma).map_err(|_| invalid("bad gain_sigma"))?;
    let offsets = Normal::new(0.0, spec.offset_sigma).map_err(|_| invalid("bad offset_sigma"))?;
    let mut out = Vec::with_capacity(branch_count);
    for _ in 0..branch_count {
        let mut gain = gains.sample(rng);
        while gain <= 0.0 {
            gain = gains.sample(rng);
        }
        let offset = offsets.sample(rng);
        out.push(ShapeFamily {
            branch_gain_error: base.branch_gain_error * gain,
            branch_offset_error: base.branch_offset_error + offset,
            ..base
        });
    }
    Ok(out)
}
