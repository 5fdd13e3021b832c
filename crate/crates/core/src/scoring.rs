//! Proper scoring rules: CRPS for predictive distributions and raw ensembles,
//! the Brier score for threshold events, and its CORP decomposition into
//! miscalibration, discrimination and uncertainty.

use thiserror::Error;

use crate::distributions::{DistributionError, Predictive};
use crate::numerics::{integrate, NumericsError, QuadratureSpec};
use crate::real::Real;

/// Largest accepted error estimate of a quadrature CRPS value.
pub const CRPS_MAX_ERROR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoringError {
    #[error("empty input")]
    Empty,
    #[error("length mismatch: {left} forecasts vs {right} outcomes")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid {what}: {value}")]
    InvalidValue { what: &'static str, value: f64 },
    #[error("CRPS quadrature failed on {part}: {source}")]
    Quadrature {
        part: &'static str,
        #[source]
        source: NumericsError,
    },
    #[error("CRPS error estimate {error} exceeds {limit}")]
    Inaccurate { error: f64, limit: f64 },
    #[error(transparent)]
    Distribution(#[from] DistributionError),
}

fn check_observation<T: Real>(y: T) -> Result<(), ScoringError> {
    if y.is_finite() && y >= T::zero() {
        Ok(())
    } else {
        Err(ScoringError::InvalidValue {
            what: "observation (must be finite and >= 0)",
            value: y.as_f64(),
        })
    }
}

/// CRPS value with its numerical error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrpsEstimate<T> {
    pub value: T,
    pub error: T,
}

/// CRPS of a predictive distribution supported on `[0, ∞)` at observation `y`.
///
/// Evaluates `∫₀^y F² dx + ∫_y^∞ (1 - F)² dx` by adaptive quadrature. The
/// upper integral is cut at the `1 - tail_cutoff_probability` quantile; the
/// neglected tail is at most `(1 - F(x*)) · E[X]` and is added to the error.
pub fn crps_distribution_estimate<T, D>(dist: &D, y: T, spec: &QuadratureSpec<T>) -> Result<CrpsEstimate<T>, ScoringError>
where
    T: Real,
    D: Predictive<T>,
{
    check_observation(y)?;
    let mut value = T::zero();
    let mut error = T::zero();

    if y > T::zero() {
        let lower = integrate(
            |x| {
                let f = dist.cdf_unchecked(x);
                f * f
            },
            T::zero(),
            y,
            spec,
        )
        .map_err(|source| ScoringError::Quadrature { part: "lower", source })?;
        value = value + lower.value;
        error = error + lower.error;
    }

    let tail_p = spec.tail_cutoff_probability;
    // the cut point only needs to be located loosely
    let cut_tol = T::lit(1e-6) * (T::one() + y);
    let cut = dist.quantile_within(T::one() - tail_p, cut_tol)?;
    let mut tail_start = y;
    if cut > y {
        let upper = integrate(
            |x| {
                let s = T::one() - dist.cdf_unchecked(x);
                s * s
            },
            y,
            cut,
            spec,
        )
        .map_err(|source| ScoringError::Quadrature { part: "upper", source })?;
        value = value + upper.value;
        error = error + upper.error;
        tail_start = cut;
    }
    let survival = (T::one() - dist.cdf_unchecked(tail_start)).max(T::zero());
    error = error + survival * dist.mean_upper_bound();

    Ok(CrpsEstimate { value, error })
}

/// CRPS of a predictive distribution; fails when the error bound exceeds [`CRPS_MAX_ERROR`].
pub fn crps_distribution<T, D>(dist: &D, y: T, spec: &QuadratureSpec<T>) -> Result<T, ScoringError>
where
    T: Real,
    D: Predictive<T>,
{
    let est = crps_distribution_estimate(dist, y, spec)?;
    let limit = T::lit(CRPS_MAX_ERROR).max(spec.abs_tol);
    if est.error > limit {
        return Err(ScoringError::Inaccurate {
            error: est.error.as_f64(),
            limit: limit.as_f64(),
        });
    }
    Ok(est.value)
}

/// CRPS of the empirical distribution of `members` at `y`:
/// `(1/m) Σ|fᵢ - y| - (1/2m²) ΣΣ|fᵢ - fⱼ|`, via the sorted-member identity
/// `ΣΣ|fᵢ - fⱼ| = 2 Σ (2i - m - 1) f₍ᵢ₎`.
pub fn crps_ensemble<T: Real>(members: &[T], y: T) -> Result<T, ScoringError> {
    if members.is_empty() {
        return Err(ScoringError::Empty);
    }
    if !y.is_finite() || members.iter().any(|f| !f.is_finite()) {
        return Err(ScoringError::InvalidValue {
            what: "non-finite ensemble input",
            value: y.as_f64(),
        });
    }
    let m = members.len();
    let mut sorted = members.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite members"));
    let mf = T::from_count(m);
    let abs_err: T = sorted.iter().map(|f| (*f - y).abs()).sum();
    let spread: T = sorted
        .iter()
        .enumerate()
        .map(|(i, f)| (T::from_count(2 * i + 1) - mf) * *f)
        .sum();
    Ok((abs_err / mf - spread / (mf * mf)).max(T::zero()))
}

/// Mean Brier score of probability forecasts against binary outcomes.
pub fn brier_score<T: Real>(probs: &[T], outcomes: &[T]) -> Result<T, ScoringError> {
    check_binary_pairs(probs, outcomes)?;
    Ok(mean_squared(probs.iter().copied(), outcomes))
}

fn mean_squared<T: Real>(forecasts: impl Iterator<Item = T>, outcomes: &[T]) -> T {
    let total: T = forecasts.zip(outcomes).map(|(p, y)| (p - *y) * (p - *y)).sum();
    total / T::from_count(outcomes.len())
}

fn check_binary_pairs<T: Real>(probs: &[T], outcomes: &[T]) -> Result<(), ScoringError> {
    if probs.len() != outcomes.len() {
        return Err(ScoringError::LengthMismatch {
            left: probs.len(),
            right: outcomes.len(),
        });
    }
    if probs.is_empty() {
        return Err(ScoringError::Empty);
    }
    if let Some(p) = probs.iter().find(|p| !(**p >= T::zero() && **p <= T::one())) {
        return Err(ScoringError::InvalidValue {
            what: "probability (must lie in [0, 1])",
            value: p.as_f64(),
        });
    }
    if let Some(y) = outcomes.iter().find(|y| **y != T::zero() && **y != T::one()) {
        return Err(ScoringError::InvalidValue {
            what: "binary outcome (must be 0 or 1)",
            value: y.as_f64(),
        });
    }
    Ok(())
}

fn check_threshold<T: Real>(tau: T) -> Result<(), ScoringError> {
    if tau.is_finite() && tau >= T::zero() {
        Ok(())
    } else {
        Err(ScoringError::InvalidValue {
            what: "threshold (must be finite and >= 0)",
            value: tau.as_f64(),
        })
    }
}

/// Predicted probability of the event `X > τ`.
pub fn event_probability<T: Real, D: Predictive<T>>(dist: &D, tau: T) -> Result<T, ScoringError> {
    check_threshold(tau)?;
    Ok(T::one() - dist.cdf(tau)?)
}

/// Fraction of members strictly above `τ`.
pub fn ensemble_event_frequency<T: Real>(members: &[T], tau: T) -> Result<T, ScoringError> {
    if members.is_empty() {
        return Err(ScoringError::Empty);
    }
    check_threshold(tau)?;
    let hits = members.iter().filter(|f| **f > tau).count();
    Ok(T::from_count(hits) / T::from_count(members.len()))
}

/// One constant piece of an isotonic fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotonicBlock<T> {
    pub x_lo: T,
    pub x_hi: T,
    pub value: T,
    pub count: usize,
}

/// Isotonic least-squares fit of outcomes on forecast values.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotonicFit<T> {
    /// Fitted value for each input pair, in input order.
    pub fitted: Vec<T>,
    /// Maximal constant segments in increasing `x` order.
    pub blocks: Vec<IsotonicBlock<T>>,
}

/// Pool-adjacent-violators fit of `y` on `x`.
///
/// Pairs with identical `x` are pooled before fitting so the result is a
/// function of `x`. The fit is nondecreasing in `x` and minimizes
/// `Σ(ŷᵢ - yᵢ)²` over all such fits.
pub fn pav_isotonic<T: Real>(x: &[T], y: &[T]) -> Result<IsotonicFit<T>, ScoringError> {
    if x.len() != y.len() {
        return Err(ScoringError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(ScoringError::Empty);
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(ScoringError::InvalidValue {
            what: "non-finite isotonic input",
            value: f64::NAN,
        });
    }
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).expect("finite"));

    struct Pool<T> {
        x_lo: T,
        x_hi: T,
        sum: T,
        count: usize,
        end: usize,
    }
    impl<T: Real> Pool<T> {
        fn mean(&self) -> T {
            self.sum / T::from_count(self.count)
        }
    }

    let mut pools: Vec<Pool<T>> = Vec::new();
    let mut k = 0;
    while k < order.len() {
        let xv = x[order[k]];
        let mut sum = T::zero();
        let mut count = 0;
        while k < order.len() && x[order[k]] == xv {
            sum = sum + y[order[k]];
            count += 1;
            k += 1;
        }
        let mut pool = Pool { x_lo: xv, x_hi: xv, sum, count, end: k };
        while let Some(prev) = pools.last() {
            // cross-multiplied comparison of block means
            if prev.sum * T::from_count(pool.count) >= pool.sum * T::from_count(prev.count) {
                let prev = pools.pop().expect("checked");
                pool = Pool {
                    x_lo: prev.x_lo,
                    x_hi: pool.x_hi,
                    sum: prev.sum + pool.sum,
                    count: prev.count + pool.count,
                    end: pool.end,
                };
            } else {
                break;
            }
        }
        pools.push(pool);
    }

    let mut fitted = vec![T::zero(); x.len()];
    let mut start = 0;
    for pool in &pools {
        let v = pool.mean();
        for &i in &order[start..pool.end] {
            fitted[i] = v;
        }
        start = pool.end;
    }
    let blocks = pools
        .iter()
        .map(|p| IsotonicBlock {
            x_lo: p.x_lo,
            x_hi: p.x_hi,
            value: p.mean(),
            count: p.count,
        })
        .collect();
    Ok(IsotonicFit { fitted, blocks })
}

/// Mean Brier score split as `mean_brier = mcb - dsc + unc`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrierDecomposition<T> {
    pub mean_brier: T,
    /// Miscalibration.
    pub mcb: T,
    /// Discrimination.
    pub dsc: T,
    /// Uncertainty `r̄(1 - r̄)`.
    pub unc: T,
}

/// CORP decomposition of the mean Brier score using the PAV-recalibrated forecasts.
pub fn brier_decomposition<T: Real>(probs: &[T], outcomes: &[T]) -> Result<BrierDecomposition<T>, ScoringError> {
    check_binary_pairs(probs, outcomes)?;
    let fit = pav_isotonic(probs, outcomes)?;
    let n = T::from_count(outcomes.len());
    let base_rate = outcomes.iter().copied().sum::<T>() / n;

    let mean_brier = mean_squared(probs.iter().copied(), outcomes);
    let recalibrated = mean_squared(fit.fitted.iter().copied(), outcomes);
    let climatology = mean_squared(std::iter::repeat(base_rate), outcomes);
    let unc = base_rate * (T::one() - base_rate);
    // both differences are nonnegative by optimality of the PAV fit; clamp rounding noise
    let mcb = (mean_brier - recalibrated).max(T::zero());
    let dsc = (climatology - recalibrated).max(T::zero());
    Ok(BrierDecomposition { mean_brier, mcb, dsc, unc })
}

/// Per-case scores with their aggregates.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport<T> {
    pub per_case: Vec<(String, T)>,
    pub mean: T,
    pub max: T,
    pub count: usize,
}

impl<T: Real> ScoreReport<T> {
    pub fn new(per_case: Vec<(String, T)>) -> Result<Self, ScoringError> {
        if per_case.is_empty() {
            return Err(ScoringError::Empty);
        }
        let count = per_case.len();
        let mean = per_case.iter().map(|(_, s)| *s).sum::<T>() / T::from_count(count);
        let max = per_case.iter().map(|(_, s)| *s).fold(T::neg_infinity(), T::max);
        Ok(Self { per_case, mean, max, count })
    }
}
