//! Predictive distributions for nonnegative quantities with a point mass at zero.
//!
//! All three families share the [`Predictive`] interface: a CDF defined on
//! `x >= 0` (identically zero below), a quantile function that returns `0`
//! for probabilities inside the atom, and a sampler driven by a caller-owned
//! random source.

mod chi0;
mod csg0;
mod gev0;

pub use chi0::Chi0Params;
pub use csg0::Csg0Params;
pub use gev0::{Gev0Params, GEV0_MAX_SHAPE};

use rand::Rng;
use thiserror::Error;

use crate::numerics::{find_root, NumericsError};
use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistributionError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("argument {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },
    #[error("quantile inversion failed: {0}")]
    Inversion(#[from] NumericsError),
}

pub(crate) fn check_param<T: Real>(
    name: &'static str,
    value: T,
    ok: bool,
    reason: &'static str,
) -> Result<(), DistributionError> {
    if value.is_finite() && ok {
        Ok(())
    } else {
        Err(DistributionError::InvalidParameter {
            name,
            value: value.as_f64(),
            reason,
        })
    }
}

/// Family tag of a [`PredictiveDistribution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Chi0,
    Csg0,
    Gev0,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Gev0, Family::Csg0, Family::Chi0];

    pub fn name(self) -> &'static str {
        match self {
            Family::Chi0 => "chi0",
            Family::Csg0 => "csg0",
            Family::Gev0 => "gev0",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "chi0" => Ok(Family::Chi0),
            "csg0" => Ok(Family::Csg0),
            "gev0" => Ok(Family::Gev0),
            other => Err(format!("unknown family '{other}' (expected chi0, csg0 or gev0)")),
        }
    }
}

/// Default absolute tolerance of quantile inversion.
pub const QUANTILE_TOLERANCE: f64 = 1e-10;

/// Common interface of the censored / zero-inflated predictive families.
pub trait Predictive<T: Real> {
    /// CDF for `x >= 0`; returns `0` for negative arguments.
    fn cdf_unchecked(&self, x: T) -> T;

    /// Probability of exactly zero, equal to `CDF(0)`.
    fn point_mass_at_zero(&self) -> T;

    /// Quantile with a caller-chosen absolute tolerance on `x`.
    fn quantile_within(&self, p: T, tol: T) -> Result<T, DistributionError>;

    /// One random draw.
    fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> T;

    /// Upper bound on `E[X]`, used to bound truncated integration tails.
    fn mean_upper_bound(&self) -> T;

    /// CDF at `x >= 0`.
    fn cdf(&self, x: T) -> Result<T, DistributionError> {
        if x.is_nan() || x < T::zero() {
            return Err(DistributionError::Domain {
                value: x.as_f64(),
                domain: "x >= 0",
            });
        }
        Ok(self.cdf_unchecked(x))
    }

    /// Smallest `x >= 0` with `CDF(x) >= p`, for `p` in `[0, 1)`.
    fn quantile(&self, p: T) -> Result<T, DistributionError> {
        self.quantile_within(p, T::lit(QUANTILE_TOLERANCE))
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<T> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }
}

pub(crate) fn check_probability<T: Real>(p: T) -> Result<(), DistributionError> {
    if p >= T::zero() && p < T::one() {
        Ok(())
    } else {
        Err(DistributionError::Domain {
            value: p.as_f64(),
            domain: "p in [0, 1)",
        })
    }
}

/// Inverts a continuous-above-zero CDF by doubling an upper bracket from
/// `scale_hint` and then root finding.
pub(crate) fn invert_cdf<T: Real, F: Fn(T) -> T>(
    cdf: F,
    p: T,
    scale_hint: T,
    tol: T,
) -> Result<T, DistributionError> {
    check_probability(p)?;
    if p <= cdf(T::zero()) {
        return Ok(T::zero());
    }
    let two = T::lit(2.0);
    let mut lo = T::zero();
    let mut hi = if scale_hint.is_finite() && scale_hint > T::zero() {
        scale_hint
    } else {
        T::one()
    };
    while cdf(hi) < p {
        lo = hi;
        hi = hi * two;
        if !hi.is_finite() {
            return Err(DistributionError::Domain {
                value: p.as_f64(),
                domain: "p with a finite quantile",
            });
        }
    }
    Ok(find_root(|x| cdf(x) - p, lo, hi, tol)?)
}

/// One of the three predictive families compared in this crate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PredictiveDistribution<T> {
    Chi0(Chi0Params<T>),
    Csg0(Csg0Params<T>),
    Gev0(Gev0Params<T>),
}

impl<T: Real> PredictiveDistribution<T> {
    pub fn family(&self) -> Family {
        match self {
            Self::Chi0(_) => Family::Chi0,
            Self::Csg0(_) => Family::Csg0,
            Self::Gev0(_) => Family::Gev0,
        }
    }

    /// Parameters in a fixed order: Chi0 `(λ, σ)`, CSG0 `(k, θ, δ)`, GEV0 `(μ, s, ξ)`.
    pub fn parameters(&self) -> Vec<T> {
        match self {
            Self::Chi0(p) => vec![p.lambda(), p.sigma()],
            Self::Csg0(p) => vec![p.shape(), p.scale(), p.shift()],
            Self::Gev0(p) => vec![p.location(), p.scale(), p.shape()],
        }
    }

    pub fn parameter_names(family: Family) -> &'static [&'static str] {
        match family {
            Family::Chi0 => &["lambda", "sigma"],
            Family::Csg0 => &["shape", "scale", "shift"],
            Family::Gev0 => &["location", "scale", "shape"],
        }
    }
}

macro_rules! dispatch {
    ($self:ident, $p:ident => $e:expr) => {
        match $self {
            PredictiveDistribution::Chi0($p) => $e,
            PredictiveDistribution::Csg0($p) => $e,
            PredictiveDistribution::Gev0($p) => $e,
        }
    };
}

impl<T: Real> Predictive<T> for PredictiveDistribution<T> {
    fn cdf_unchecked(&self, x: T) -> T {
        dispatch!(self, p => p.cdf_unchecked(x))
    }

    fn point_mass_at_zero(&self) -> T {
        dispatch!(self, p => p.point_mass_at_zero())
    }

    fn quantile_within(&self, prob: T, tol: T) -> Result<T, DistributionError> {
        dispatch!(self, p => p.quantile_within(prob, tol))
    }

    fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        dispatch!(self, p => p.sample_one(rng))
    }

    fn mean_upper_bound(&self) -> T {
        dispatch!(self, p => p.mean_upper_bound())
    }
}

impl<T> From<Chi0Params<T>> for PredictiveDistribution<T> {
    fn from(p: Chi0Params<T>) -> Self {
        Self::Chi0(p)
    }
}

impl<T> From<Csg0Params<T>> for PredictiveDistribution<T> {
    fn from(p: Csg0Params<T>) -> Self {
        Self::Csg0(p)
    }
}

impl<T> From<Gev0Params<T>> for PredictiveDistribution<T> {
    fn from(p: Gev0Params<T>) -> Self {
        Self::Gev0(p)
    }
}
