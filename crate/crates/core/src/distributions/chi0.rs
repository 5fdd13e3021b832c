use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use super::{check_param, invert_cdf, DistributionError, Predictive};
use crate::real::Real;

/// Cumulative Poisson weight after which the mixture series stops.
const SERIES_MASS: f64 = 1.0 - 1e-14;
/// Above this Poisson mean the recursion switches to log space to avoid underflow.
const LOG_SPACE_THRESHOLD: f64 = 500.0;

/// Scaled non-central χ² distribution with zero degrees of freedom.
///
/// `X / σ` is a Poisson(λ/2) mixture of a point mass at zero and central χ²
/// variables with 2, 4, 6, ... degrees of freedom, so `P(X = 0) = exp(-λ/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chi0Params<T> {
    lambda: T,
    sigma: T,
}

impl<T: Real> Chi0Params<T> {
    pub fn new(lambda: T, sigma: T) -> Result<Self, DistributionError> {
        check_param("lambda", lambda, lambda >= T::zero(), "must be finite and >= 0")?;
        check_param("sigma", sigma, sigma > T::zero(), "must be finite and > 0")?;
        Ok(Self { lambda, sigma })
    }

    /// Non-centrality λ.
    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Scale σ.
    pub fn sigma(&self) -> T {
        self.sigma
    }

    /// Mean `σλ` and variance `4σ²λ`.
    pub fn moments(&self) -> (T, T) {
        let four = T::lit(4.0);
        (self.sigma * self.lambda, four * self.sigma * self.sigma * self.lambda)
    }

    /// Largest number of mixture terms ever summed for this λ.
    pub fn series_term_cap(&self) -> usize {
        let mu = self.lambda.as_f64() / 2.0;
        (mu + 40.0 * (mu + 1.0).sqrt() + 100.0).ceil() as usize
    }

    /// Unscaled CDF `F₀(z; λ)` for `z >= 0`.
    pub fn standard_cdf(&self, z: T) -> T {
        let mu = self.lambda * T::lit(0.5);
        if mu == T::zero() {
            return T::one();
        }
        if z <= T::zero() {
            return (-mu).exp();
        }
        let h = z * T::lit(0.5);
        let cap = self.series_term_cap();
        let threshold = T::lit(LOG_SPACE_THRESHOLD);
        if mu < threshold && h < threshold {
            series_direct(mu, h, cap)
        } else {
            series_log_space(mu, h, cap)
        }
    }
}

// F = 1 - Σ_j Pois(j; μ) · P(Pois(h) <= j - 1). Summing the survival side keeps
// every term non-increasing in h, so the truncated series stays monotone in x.
fn series_direct<T: Real>(mu: T, h: T, cap: usize) -> T {
    let target = T::lit(SERIES_MASS);
    let mut weight = (-mu).exp();
    let mut erlang_term = (-h).exp();
    let mut erlang_cdf = T::zero();
    let mut mass = weight;
    let mut total = T::zero();
    for j in 1..=cap {
        let jj = T::from_count(j);
        erlang_cdf = erlang_cdf + erlang_term;
        erlang_term = erlang_term * h / jj;
        weight = weight * mu / jj;
        mass = mass + weight;
        total = total + weight * erlang_cdf.min(T::one());
        if mass >= target {
            break;
        }
    }
    (T::one() - total).max((-mu).exp())
}

fn series_log_space<T: Real>(mu: T, h: T, cap: usize) -> T {
    let target = T::lit(SERIES_MASS);
    let ln_mu = mu.ln();
    let ln_h = h.ln();
    let mut ln_fact = T::zero();
    let mut erlang_cdf = T::zero();
    let mut mass = T::zero();
    let mut total = T::zero();
    for j in 0..=cap {
        if j > 0 {
            erlang_cdf = erlang_cdf + (T::from_count(j - 1) * ln_h - h - ln_fact).exp();
            ln_fact = ln_fact + T::from_count(j).ln();
        }
        let weight = (T::from_count(j) * ln_mu - mu - ln_fact).exp();
        mass = mass + weight;
        total = total + weight * erlang_cdf.min(T::one());
        if mass >= target {
            break;
        }
    }
    (T::one() - total).max((-mu).exp())
}

impl<T: Real> Predictive<T> for Chi0Params<T> {
    fn cdf_unchecked(&self, x: T) -> T {
        if x < T::zero() {
            return T::zero();
        }
        self.standard_cdf(x / self.sigma)
    }

    fn point_mass_at_zero(&self) -> T {
        (-self.lambda * T::lit(0.5)).exp()
    }

    fn quantile_within(&self, p: T, tol: T) -> Result<T, DistributionError> {
        let (mean, var) = self.moments();
        let hint = (mean + T::lit(4.0) * var.sqrt()).max(self.sigma);
        invert_cdf(|x| self.cdf_unchecked(x), p, hint, tol)
    }

    fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let mu = self.lambda.as_f64() / 2.0;
        if mu == 0.0 {
            return T::zero();
        }
        let poisson = Poisson::new(mu).expect("positive Poisson mean");
        draw_given_count(poisson.sample(rng), self.sigma.as_f64(), rng)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<T> {
        let mu = self.lambda.as_f64() / 2.0;
        if mu == 0.0 {
            return vec![T::zero(); n];
        }
        let poisson = Poisson::new(mu).expect("positive Poisson mean");
        let sigma = self.sigma.as_f64();
        (0..n)
            .map(|_| draw_given_count(poisson.sample(rng), sigma, rng))
            .collect()
    }

    fn mean_upper_bound(&self) -> T {
        self.moments().0
    }
}

// σ · χ²(2J) is Gamma(shape J, scale 2σ).
fn draw_given_count<T: Real, R: Rng + ?Sized>(count: f64, sigma: f64, rng: &mut R) -> T {
    if count == 0.0 {
        return T::zero();
    }
    let gamma = Gamma::new(count, 2.0 * sigma).expect("positive gamma parameters");
    T::lit(gamma.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{gamma_p, ln_gamma};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    // Brute-force partial sum with incomplete-gamma central terms.
    fn chi0_cdf_partial_sum(x: f64, lambda: f64, sigma: f64, terms: usize) -> f64 {
        let mu = lambda / 2.0;
        if mu == 0.0 {
            return 1.0;
        }
        let h = x / sigma / 2.0;
        let mut total = 0.0;
        for j in 0..terms {
            let weight = (j as f64 * mu.ln() - mu - ln_gamma(j as f64 + 1.0)).exp();
            let central = if j == 0 {
                1.0
            } else if h == 0.0 {
                0.0
            } else {
                gamma_p(j as f64, h)
            };
            total += weight * central;
        }
        total
    }

    fn chi(lambda: f64, sigma: f64) -> Chi0Params<f64> {
        Chi0Params::new(lambda, sigma).unwrap()
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(Chi0Params::new(-0.1, 1.0).is_err());
        assert!(Chi0Params::new(1.0, 0.0).is_err());
        assert!(Chi0Params::new(f64::NAN, 1.0).is_err());
        assert!(Chi0Params::new(f64::INFINITY, 1.0).is_err());
        assert!(Chi0Params::new(1.0, f64::INFINITY).is_err());
    }

    #[test]
    fn atom_at_zero() {
        assert!((chi(2.0, 1.0).cdf(0.0).unwrap() - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(chi(0.0, 1.0).cdf(0.0).unwrap(), 1.0);
        assert!(chi(1.0, 1.0).cdf(-1e-12).is_err());
    }

    #[test]
    fn moments_match_closed_form() {
        assert_eq!(chi(2.0, 3.0).moments(), (6.0, 72.0));
        assert_eq!(chi(0.0, 1.0).moments(), (0.0, 0.0));
        assert_eq!(chi(1.0, 1.0).moments(), (1.0, 4.0));
    }

    // The j = 1 mixture component is σ·χ²₂, an exponential with mean 2σ.
    #[test]
    fn agrees_with_hand_expanded_first_terms() {
        let (lambda, x) = (0.3f64, 1.7f64);
        let mu = lambda / 2.0;
        let h = x / 2.0;
        let mut expected = 0.0;
        let mut fact = 1.0;
        for j in 0..40 {
            if j > 0 {
                fact *= j as f64;
            }
            let weight = (-mu).exp() * mu.powi(j) / fact;
            let central = if j == 0 {
                1.0
            } else {
                let mut s = 0.0;
                let mut f = 1.0;
                for i in 0..j {
                    if i > 0 {
                        f *= i as f64;
                    }
                    s += (-h).exp() * h.powi(i) / f;
                }
                1.0 - s
            };
            expected += weight * central;
        }
        assert!((chi(lambda, 1.0).cdf(x).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn series_matches_long_partial_sums() {
        for &lambda in &[0.01, 0.5, 2.0, 7.5, 20.0, 50.0] {
            for &sigma in &[0.3, 1.0, 4.0] {
                for &x in &[0.01, 0.5, 2.0, 10.0, 40.0, 150.0] {
                    let got = chi(lambda, sigma).cdf(x).unwrap();
                    let oracle = chi0_cdf_partial_sum(x, lambda, sigma, 10_000);
                    assert!((got - oracle).abs() < 1e-10, "λ={lambda} σ={sigma} x={x}: {got} vs {oracle}");
                }
            }
        }
    }

    #[test]
    fn log_space_branch_is_continuous_with_direct_branch() {
        let d = chi(999.0, 1.0);
        let just_below = series_direct(499.5f64, 520.0 / 2.0, d.series_term_cap());
        let logged = series_log_space(499.5f64, 520.0 / 2.0, d.series_term_cap());
        assert!((just_below - logged).abs() < 1e-11);
        let big = chi(2000.0, 1.0);
        let median_region = big.cdf(2000.0).unwrap();
        assert!(median_region > 0.4 && median_region < 0.6, "{median_region}");
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(chi(2.0, 1.0).quantile(0.2).unwrap(), 0.0);
        for &(l, s) in &[(2.0, 1.0), (5.0, 0.4), (0.7, 3.0)] {
            let d = chi(l, s);
            assert_eq!(d.quantile(d.point_mass_at_zero()).unwrap(), 0.0);
        }
        let d = chi(4.0, 2.0);
        let q = d.quantile(0.9).unwrap();
        assert!((d.cdf(q).unwrap() - 0.9).abs() < 1e-8);
        assert!(d.quantile(1.0).is_err());
        assert!(d.quantile(-0.1).is_err());
    }

    #[test]
    fn quantile_round_trip_above_atom() {
        let d = chi(3.0, 1.5);
        for &x in &[0.05, 0.4, 1.0, 3.3, 9.0, 25.0] {
            let p = d.cdf(x).unwrap();
            assert!(p > d.point_mass_at_zero());
            let back = d.quantile(p).unwrap();
            assert!((back - x).abs() < 1e-6, "x={x} back={back}");
        }
    }

    #[test]
    fn degenerate_lambda_samples_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let draws = chi(0.0, 5.0).sample(&mut rng, 1000);
        assert!(draws.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_fraction_matches_atom() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000;
        let draws = chi(2.0, 1.0).sample(&mut rng, n);
        let zeros = draws.iter().filter(|&&v| v == 0.0).count() as f64 / n as f64;
        let p = (-1f64).exp();
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((zeros - p).abs() < 3.0 * se, "{zeros} vs {p}");
    }

    #[test]
    fn sample_moments_match() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let d = chi(3.0, 2.0);
        let draws = d.sample(&mut rng, n);
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let (m, v) = d.moments();
        assert_eq!((m, v), (6.0, 48.0));
        // fourth central moment of the sample bounds the variance's standard error
        let m4 = draws.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n as f64;
        assert!((mean - m).abs() < 4.0 * (v / n as f64).sqrt(), "mean {mean}");
        assert!((var - v).abs() < 4.0 * ((m4 - var * var) / n as f64).sqrt(), "var {var}");
    }

    #[test]
    fn single_precision_instantiation() {
        let d = Chi0Params::<f32>::new(2.0, 1.0).unwrap();
        assert!((d.cdf(0.0).unwrap() - (-1f32).exp()).abs() < 1e-6);
        let d64 = chi(2.0, 1.0);
        assert!((d.cdf(3.0).unwrap() as f64 - d64.cdf(3.0).unwrap()).abs() < 1e-5);
    }
}
