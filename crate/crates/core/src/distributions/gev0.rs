use rand::Rng;
use rand_distr::{Distribution, Open01};

use super::{check_probability, check_param, DistributionError, Predictive};
use crate::real::Real;
use crate::special::{gamma, EULER_GAMMA};

/// Exclusive upper bound of the GEV0 shape parameter (finite variance).
pub const GEV0_MAX_SHAPE: f64 = 0.5;

// Below this |ξ| the Gumbel limit is used in moment matching.
const GUMBEL_LIMIT: f64 = 1e-7;

/// Generalized extreme value distribution left-censored at zero.
///
/// All mass the GEV puts below zero sits on the atom at `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gev0Params<T> {
    location: T,
    scale: T,
    shape: T,
}

impl<T: Real> Gev0Params<T> {
    pub fn new(location: T, scale: T, shape: T) -> Result<Self, DistributionError> {
        check_param("location", location, true, "must be finite")?;
        check_param("scale", scale, scale > T::zero(), "must be finite and > 0")?;
        check_param(
            "shape",
            shape,
            shape >= T::zero() && shape < T::lit(GEV0_MAX_SHAPE),
            "must lie in [0, 0.5)",
        )?;
        Ok(Self { location, scale, shape })
    }

    /// Location and scale such that the uncensored GEV has the given mean and
    /// standard deviation for shape `ξ`.
    pub fn from_mean_sd(mean: T, sd: T, shape: T) -> Result<Self, DistributionError> {
        check_param("mean", mean, true, "must be finite")?;
        check_param("sd", sd, sd > T::zero(), "must be finite and > 0")?;
        check_param(
            "shape",
            shape,
            shape >= T::zero() && shape < T::lit(GEV0_MAX_SHAPE),
            "must lie in [0, 0.5)",
        )?;
        if shape < T::lit(GUMBEL_LIMIT) {
            let scale = sd * T::lit(6.0).sqrt() / T::PI();
            return Self::new(mean - T::lit(EULER_GAMMA) * scale, scale, shape);
        }
        let (g1_minus_one, spread) = gamma_moment_terms(shape);
        let scale = sd * shape / spread.sqrt();
        let location = mean - scale * g1_minus_one / shape;
        Self::new(location, scale, shape)
    }

    pub fn location(&self) -> T {
        self.location
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn shape(&self) -> T {
        self.shape
    }

    /// Mean and variance of the uncensored GEV.
    pub fn uncensored_moments(&self) -> (T, T) {
        let (mu, s, xi) = (self.location, self.scale, self.shape);
        if xi < T::lit(GUMBEL_LIMIT) {
            let pi = T::PI();
            return (mu + T::lit(EULER_GAMMA) * s, pi * pi * s * s / T::lit(6.0));
        }
        let (g1_minus_one, spread) = gamma_moment_terms(xi);
        (mu + s * g1_minus_one / xi, s * s * spread / (xi * xi))
    }

    /// CDF of the uncensored GEV at any real `x`.
    pub fn gev_cdf(&self, x: T) -> T {
        let z = (x - self.location) / self.scale;
        if self.shape == T::zero() {
            return (-(-z).exp()).exp();
        }
        let t = self.shape * z;
        if t <= -T::one() {
            return T::zero();
        }
        // (1 + ξz)^{-1/ξ}
        (-(-t.ln_1p() / self.shape).exp()).exp()
    }

    fn gev_quantile(&self, p: T) -> T {
        let y = -(-p.ln()).ln();
        if self.shape == T::zero() {
            self.location + self.scale * y
        } else {
            self.location + self.scale * (self.shape * y).exp_m1() / self.shape
        }
    }
}

// ζ(2), ζ(3), ..., ζ(25)
#[allow(clippy::excessive_precision)]
const ZETA: [f64; 24] = [
    1.6449340668482264,
    1.2020569031595943,
    1.0823232337111382,
    1.0369277551433699,
    1.0173430619844491,
    1.0083492773819228,
    1.0040773561979443,
    1.0020083928260822,
    1.0009945751278181,
    1.0004941886041195,
    1.0002460865533080,
    1.0001227133475785,
    1.0000612481350587,
    1.0000305882363070,
    1.0000152822594086,
    1.0000076371976379,
    1.0000038172932650,
    1.0000019082127166,
    1.0000009539620339,
    1.0000004769329868,
    1.0000002384505027,
    1.0000001192199260,
    1.0000000596081891,
    1.0000000298035035,
];

// Below this shape the moment terms come from the ln Γ(1 - x) series.
const SERIES_SHAPE_LIMIT: f64 = 0.05;

/// `(g₁ - 1, g₂ - g₁²)` with `g_k = Γ(1 - kξ)`, free of cancellation for small ξ.
fn gamma_moment_terms<T: Real>(xi: T) -> (T, T) {
    if xi >= T::lit(SERIES_SHAPE_LIMIT) {
        let g1 = gamma(T::one() - xi);
        let g2 = gamma(T::one() - T::lit(2.0) * xi);
        return (g1 - T::one(), g2 - g1 * g1);
    }
    // ln Γ(1 - x) = γx + Σ_{k≥2} ζ(k) x^k / k
    let mut ln_g1 = T::lit(EULER_GAMMA) * xi;
    // ln g₂ - 2 ln g₁ = Σ_{k≥2} ζ(k) (2^k - 2) ξ^k / k
    let mut excess = T::zero();
    let mut power = xi;
    let mut two_k = T::lit(2.0);
    for (i, &z) in ZETA.iter().enumerate() {
        let k = T::from_count(i + 2);
        power = power * xi;
        two_k = two_k * T::lit(2.0);
        let term = T::lit(z) * power / k;
        ln_g1 = ln_g1 + term;
        excess = excess + term * (two_k - T::lit(2.0));
    }
    let g1_sq = (T::lit(2.0) * ln_g1).exp();
    (ln_g1.exp_m1(), g1_sq * excess.exp_m1())
}

impl<T: Real> Predictive<T> for Gev0Params<T> {
    fn cdf_unchecked(&self, x: T) -> T {
        if x < T::zero() {
            return T::zero();
        }
        self.gev_cdf(x)
    }

    fn point_mass_at_zero(&self) -> T {
        self.gev_cdf(T::zero())
    }

    fn quantile_within(&self, p: T, _tol: T) -> Result<T, DistributionError> {
        check_probability(p)?;
        if p <= self.point_mass_at_zero() {
            return Ok(T::zero());
        }
        Ok(self.gev_quantile(p).max(T::zero()))
    }

    fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let u: f64 = Open01.sample(rng);
        self.gev_quantile(T::lit(u)).max(T::zero())
    }

    // E[max(G, 0)] <= E|G| <= sqrt(E[G²])
    fn mean_upper_bound(&self) -> T {
        let (m, v) = self.uncensored_moments();
        (m * m + v).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn validates_shape_interval() {
        assert!(Gev0Params::<f64>::new(0.0, 1.0, 0.0).is_ok());
        assert!(Gev0Params::<f64>::new(0.0, 1.0, 0.4999).is_ok());
        assert!(Gev0Params::<f64>::new(0.0, 1.0, 0.5).is_err());
        assert!(Gev0Params::<f64>::new(0.0, 1.0, -0.01).is_err());
        assert!(Gev0Params::<f64>::new(0.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn gumbel_atom_by_hand() {
        let d = Gev0Params::<f64>::new(1.0, 1.0, 0.0).unwrap();
        let expected = (-(1f64).exp()).exp();
        assert!((d.cdf(0.0).unwrap() - expected).abs() < 1e-15);
        assert_eq!(d.point_mass_at_zero(), d.cdf(0.0).unwrap());
    }

    #[test]
    fn positive_shape_has_lower_endpoint() {
        // support starts at μ - s/ξ = 1
        let d = Gev0Params::<f64>::new(5.0, 1.0, 0.25).unwrap();
        assert_eq!(d.cdf(0.5).unwrap(), 0.0);
        assert_eq!(d.point_mass_at_zero(), 0.0);
        assert!(d.cdf(2.5).unwrap() > 0.0);
    }

    #[test]
    fn gumbel_moment_match() {
        let d = Gev0Params::<f64>::from_mean_sd(3.0, 2.0, 0.0).unwrap();
        let scale = 2.0 * 6f64.sqrt() / std::f64::consts::PI;
        assert!((d.scale() - scale).abs() < 1e-14);
        assert!((d.location() - (3.0 - EULER_GAMMA * scale)).abs() < 1e-14);
    }

    #[test]
    fn moment_match_round_trips() {
        for &xi in &[0.0, 1e-9, 0.05, 0.2, 0.45] {
            let d = Gev0Params::<f64>::from_mean_sd(4.0, 1.5, xi).unwrap();
            let (m, v) = d.uncensored_moments();
            assert!((m - 4.0).abs() < 1e-9 && (v.sqrt() - 1.5).abs() < 1e-9, "ξ={xi}: {m} {v}");
        }
        // continuity across the Gumbel switch
        let a = Gev0Params::<f64>::from_mean_sd(4.0, 1.5, 0.0).unwrap();
        let b = Gev0Params::<f64>::from_mean_sd(4.0, 1.5, 2e-7).unwrap();
        assert!((a.cdf(5.0).unwrap() - b.cdf(5.0).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn series_and_gamma_branches_agree() {
        let at_limit = SERIES_SHAPE_LIMIT;
        let below = gamma_moment_terms(at_limit * (1.0 - 1e-12));
        let g1 = gamma(1.0 - at_limit);
        let g2 = gamma(1.0 - 2.0 * at_limit);
        assert!((below.0 - (g1 - 1.0)).abs() < 1e-13);
        assert!((below.1 - (g2 - g1 * g1)).abs() < 1e-13);
    }

    #[test]
    fn cdf_matches_monte_carlo() {
        let d = Gev0Params::<f64>::new(0.7, 1.3, 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 400_000;
        let draws = d.sample(&mut rng, n);
        for &x in &[0.0, 0.4, 2.0, 8.0] {
            let p = d.cdf(x).unwrap();
            let emp = draws.iter().filter(|&&v| v <= x).count() as f64 / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((emp - p).abs() < 3.0 * se, "x={x}: {emp} vs {p}");
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let d = Gev0Params::<f64>::new(2.0, 1.0, 0.1).unwrap();
        for &p in &[0.3, 0.7, 0.999] {
            let q = d.quantile(p).unwrap();
            assert!((d.cdf(q).unwrap() - p).abs() < 1e-12);
        }
        assert_eq!(d.quantile(d.point_mass_at_zero() * 0.5).unwrap(), 0.0);
    }
}
