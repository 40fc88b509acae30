use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimConfig {
    pub seed: u64,
    pub restarts: usize,
    pub grid_points: usize,
    pub refine_passes: usize,
    pub max_enum: u64,
    pub tol: f64,
}

impl Default for OptimConfig {
    fn default() -> Self {
        OptimConfig {
            seed: 0x5eed,
            restarts: 32,
            grid_points: 64,
            refine_passes: 3,
            max_enum: 1 << 20,
            tol: 1e-9,
        }
    }
}

impl OptimConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts.max(1);
        self
    }

    /// Generator for substream `i`.
    pub fn rng(&self, i: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ i)
    }

    pub fn validate(&self) -> crate::Result<()> {
        let bad = |m: &str| Err(crate::Error::Invalid(m.into()));
        if self.restarts < 1 {
            return bad("restarts must be at least 1");
        }
        if self.grid_points < 8 {
            return bad("grid_points must be at least 8");
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return bad("tol must be positive");
        }
        Ok(())
    }
}
