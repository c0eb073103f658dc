//! Small deterministic PRNG for Monte Carlo validation paths and synthetic
//! test data. SplitMix64 core with a Box-Muller normal transform; identical
//! sequences on every platform for a given seed.

#[allow(unused_imports)] // f64 math comes from the Float trait in no_std builds
use num_traits::Float;

/// SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Two independent standard normal deviates.
    pub fn normal_pair(&mut self) -> (f64, f64) {
        // Box-Muller; reject u = 0 so the log stays finite.
        let mut u = self.uniform();
        while u <= 0.0 {
            u = self.uniform();
        }
        let v = self.uniform();
        let r = (-2.0 * u.ln()).sqrt();
        let angle = core::f64::consts::TAU * v;
        (r * angle.cos(), r * angle.sin())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_for_a_seed() {
        let mut a = SplitMix64::new(42);
        let mut b = SplitMix64::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn normals_have_sane_moments() {
        let mut rng = SplitMix64::new(7);
        let n = 20_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let (x, y) = rng.normal_pair();
            sum += x + y;
            sum_sq += x * x + y * y;
        }
        let mean = sum / (2.0 * n as f64);
        let var = sum_sq / (2.0 * n as f64);
        assert!(mean.abs() < 0.02);
        assert!((var - 1.0).abs() < 0.03);
    }
}
