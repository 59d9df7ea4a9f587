use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spectrum::MatrixSet;

/// Parameters of a batch of independent μ-random walks `Yₙ = Xₙ ⋯ X₁`,
/// with μ given by the set's weights (uniform when absent).
#[derive(Debug, Clone)]
pub struct WalkConfig {
    pub set: MatrixSet,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    /// Step counts at which `κ(Y_m)/m` is recorded; sorted, each in `1..=n`.
    /// Empty means `[n]`.
    pub checkpoints: Vec<usize>,
}

impl WalkConfig {
    pub fn new(set: MatrixSet, n: usize, samples: usize, seed: u64) -> Self {
        WalkConfig {
            set,
            n,
            samples,
            seed,
            checkpoints: vec![n],
        }
    }

    pub fn with_checkpoints(mut self, checkpoints: Vec<usize>) -> Self {
        self.checkpoints = checkpoints;
        self
    }

    pub(crate) fn resolved_checkpoints(&self) -> Vec<usize> {
        if self.checkpoints.is_empty() {
            vec![self.n]
        } else {
            self.checkpoints.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("walk length must be at least 1".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidConfig("need at least one sample".into()));
        }
        let cps = self.resolved_checkpoints();
        if cps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("checkpoints must be strictly increasing".into()));
        }
        if cps[0] == 0 || *cps.last().unwrap() > self.n {
            return Err(Error::InvalidConfig(format!(
                "checkpoints must lie in 1..={}",
                self.n
            )));
        }
        let w = self.set.weights_or_uniform();
        if w.iter().any(|x| !(*x >= 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig("step law is not a probability vector".into()));
        }
        Ok(())
    }
}

/// Random stream of walker `walker_id`: ChaCha8 keyed by the master seed,
/// on stream number `walker_id`. Draws of one walker never depend on how
/// walkers are distributed over threads.
pub fn walker_rng(seed: u64, walker_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(walker_id);
    rng
}
