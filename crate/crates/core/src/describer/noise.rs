//! Laplace mechanism and the noise scales used by the describer.

use rand::Rng;

use crate::describer::mi::mi_sensitivity;
use crate::scalar::Scalar;

/// Zero-mean Laplace distribution with scale `b` (variance `2 b^2`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Laplace<T> {
    scale: T,
}

impl<T: Scalar> Laplace<T> {
    pub fn new(scale: T) -> Self {
        assert!(scale >= T::zero() && scale.is_finite(), "Laplace scale must be finite and >= 0");
        Self { scale }
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        if self.scale == T::zero() {
            return T::zero();
        }
        let u = loop {
            let u: f64 = rng.gen();
            if u > 0.0 {
                break T::of(u) - T::of(0.5);
            }
        };
        let two = T::of(2.0);
        -self.scale * u.signum() * (T::one() - two * u.abs()).ln()
    }
}

/// Scale for noisy-max structure selection: `2 (d - 1) ΔI / ε_struct`.
pub fn structure_noise_scale<T: Scalar>(d: usize, n: usize, epsilon_struct: T) -> T {
    T::of(2.0) * T::of_usize(d.saturating_sub(1)) * mi_sensitivity::<T>(n) / epsilon_struct
}

/// Scale added to each normalized joint cell: `4 (d - k) / (n ε_dist)`.
pub fn distribution_noise_scale<T: Scalar>(d: usize, k: usize, n: usize, epsilon_dist: T) -> T {
    T::of(4.0) * T::of_usize(d - k) / (T::of_usize(n) * epsilon_dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_scale_is_silent() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(Laplace::new(0.0f64).sample(&mut rng), 0.0);
    }

    #[test]
    fn scales() {
        assert_eq!(distribution_noise_scale(5, 1, 100, 0.05f64), 4.0 * 4.0 / 5.0);
        assert_eq!(structure_noise_scale(1, 100, 0.5f64), 0.0);
        let s: f64 = structure_noise_scale(3, 10, 0.5);
        assert!((s - 2.0 * 2.0 * mi_sensitivity::<f64>(10) / 0.5).abs() < 1e-15);
    }

    #[test]
    fn moments_f32() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let lap = Laplace::new(2.0f32);
        let n = 20_000;
        let draws: Vec<f32> = (0..n).map(|_| lap.sample(&mut rng)).collect();
        let mean_abs = draws.iter().map(|x| x.abs()).sum::<f32>() / n as f32;
        assert!((mean_abs - 2.0).abs() < 0.1);
    }
}
