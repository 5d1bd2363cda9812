use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::core_model::{Horizon, TabulatedDensity};
use crate::error::{PricingError, Result};

/// Draws terminal times from a random horizon by inverting its CDF.
#[derive(Debug, Clone)]
pub struct HorizonSampler {
    density: TabulatedDensity,
}

impl HorizonSampler {
    pub fn new(horizon: &Horizon) -> Result<Self> {
        match horizon.density()? {
            Some(density) => Ok(Self { density }),
            None => Err(PricingError::invalid(
                "a fixed horizon has no distribution to sample",
            )),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.density.quantile(rng.random::<f64>())
    }

    pub fn density(&self) -> &TabulatedDensity {
        &self.density
    }
}

/// One draw of the terminal time, reproducible for a given seed.
pub fn sample_horizon(horizon: &Horizon, seed: u64) -> Result<f64> {
    let sampler = HorizonSampler::new(horizon)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sampler.sample(&mut rng))
}
