//! Bounded-noise state estimator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::plant::State;

/// Adds noise drawn uniformly from the disk of radius `delta`.
#[derive(Debug, Clone)]
pub struct Estimator {
    pub delta: f64,
    rng: ChaCha8Rng,
}

impl Estimator {
    pub fn new(delta: f64, seed: u64) -> Self {
        assert!(delta >= 0.0, "noise bound must be nonnegative");
        Estimator { delta, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn estimate(&mut self, x: &State) -> State {
        let r = self.delta * self.rng.gen::<f64>().sqrt();
        let phi = std::f64::consts::TAU * self.rng.gen::<f64>();
        let mut eta = [r * phi.cos(), r * phi.sin()];
        let norm = eta[0].hypot(eta[1]);
        if norm > self.delta {
            let s = self.delta / norm;
            eta = [eta[0] * s, eta[1] * s];
        }
        [x[0] + eta[0], x[1] + eta[1]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_is_exact() {
        let mut e = Estimator::new(0.0, 7);
        assert_eq!(e.estimate(&[0.3, -0.1]), [0.3, -0.1]);
    }

    #[test]
    fn noise_stays_in_the_disk() {
        let mut e = Estimator::new(0.01, 3);
        for _ in 0..10_000 {
            let x = e.estimate(&[1.0, 2.0]);
            assert!((x[0] - 1.0).hypot(x[1] - 2.0) <= 0.01);
        }
    }

    #[test]
    fn reproducible_per_seed() {
        let mut a = Estimator::new(0.1, 11);
        let mut b = Estimator::new(0.1, 11);
        for _ in 0..100 {
            assert_eq!(a.estimate(&[0.0, 0.0]), b.estimate(&[0.0, 0.0]));
        }
    }
}
