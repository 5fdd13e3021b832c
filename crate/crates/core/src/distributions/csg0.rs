use rand::Rng;
use rand_distr::{Distribution, Gamma};

use super::{check_param, invert_cdf, DistributionError, Predictive};
use crate::real::Real;
use crate::special::gamma_p;

/// Gamma distribution shifted left by `shift` and censored at zero.
///
/// `X = max(Z - δ, 0)` with `Z ~ Gamma(k, θ)`, so `P(X = 0) = GammaCDF(δ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Csg0Params<T> {
    shape: T,
    scale: T,
    shift: T,
}

impl<T: Real> Csg0Params<T> {
    pub fn new(shape: T, scale: T, shift: T) -> Result<Self, DistributionError> {
        check_param("shape", shape, shape > T::zero(), "must be finite and > 0")?;
        check_param("scale", scale, scale > T::zero(), "must be finite and > 0")?;
        check_param("shift", shift, shift >= T::zero(), "must be finite and >= 0")?;
        Ok(Self { shape, scale, shift })
    }

    /// Builds the gamma part from its mean and standard deviation
    /// (`k = mean²/sd²`, `θ = sd²/mean`).
    pub fn from_mean_sd(mean: T, sd: T, shift: T) -> Result<Self, DistributionError> {
        check_param("mean", mean, mean > T::zero(), "must be finite and > 0")?;
        check_param("sd", sd, sd > T::zero(), "must be finite and > 0")?;
        let ratio = mean / sd;
        Self::new(ratio * ratio, sd * sd / mean, shift)
    }

    pub fn shape(&self) -> T {
        self.shape
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn shift(&self) -> T {
        self.shift
    }

    fn gamma_cdf(&self, z: T) -> T {
        gamma_p(self.shape, z / self.scale)
    }
}

impl<T: Real> Predictive<T> for Csg0Params<T> {
    fn cdf_unchecked(&self, x: T) -> T {
        if x < T::zero() {
            return T::zero();
        }
        self.gamma_cdf(x + self.shift)
    }

    fn point_mass_at_zero(&self) -> T {
        self.gamma_cdf(self.shift)
    }

    fn quantile_within(&self, p: T, tol: T) -> Result<T, DistributionError> {
        let mean = self.shape * self.scale;
        let sd = self.shape.sqrt() * self.scale;
        let hint = (mean + T::lit(4.0) * sd - self.shift).max(self.scale);
        invert_cdf(|x| self.cdf_unchecked(x), p, hint, tol)
    }

    fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let gamma = Gamma::new(self.shape.as_f64(), self.scale.as_f64()).expect("valid gamma");
        T::lit((gamma.sample(rng) - self.shift.as_f64()).max(0.0))
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<T> {
        let gamma = Gamma::new(self.shape.as_f64(), self.scale.as_f64()).expect("valid gamma");
        let shift = self.shift.as_f64();
        (0..n)
            .map(|_| T::lit((gamma.sample(rng) - shift).max(0.0)))
            .collect()
    }

    // max(Z - δ, 0) <= Z
    fn mean_upper_bound(&self) -> T {
        self.shape * self.scale
    }
}
