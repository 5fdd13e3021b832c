//! Calibration diagnostics: randomized PIT values, verification ranks,
//! histograms, χ² uniformity tests and reliability diagrams.

use rand::Rng;
use thiserror::Error;

use crate::distributions::{DistributionError, Predictive};
use crate::real::Real;
use crate::scoring::{brier_decomposition, pav_isotonic, BrierDecomposition, ScoringError};
use crate::special::chi_square_sf;

/// Default number of PIT histogram bins.
pub const DEFAULT_PIT_BINS: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerificationError {
    #[error("empty input")]
    Empty,
    #[error("value {0} outside [0, 1]")]
    OutOfUnitInterval(f64),
    #[error("observation {0} must be finite and >= 0")]
    InvalidObservation(f64),
    #[error("rank {rank} outside 1..={max}")]
    InvalidRank { rank: usize, max: usize },
    #[error("histogram needs at least one bin")]
    NoBins,
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
}

/// Probability integral transform of one forecast case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PitValue<T> {
    pub value: T,
    /// True iff the observation was zero and the value was drawn from `(0, F(0)]`.
    pub randomized: bool,
}

/// PIT of `y` under `dist`; zero observations get a uniform draw on `(0, F(0)]`.
pub fn pit<T, D, R>(dist: &D, y: T, rng: &mut R) -> Result<PitValue<T>, VerificationError>
where
    T: Real,
    D: Predictive<T>,
    R: Rng + ?Sized,
{
    if !(y.is_finite() && y >= T::zero()) {
        return Err(VerificationError::InvalidObservation(y.as_f64()));
    }
    if y > T::zero() {
        return Ok(PitValue {
            value: dist.cdf(y)?,
            randomized: false,
        });
    }
    let atom = dist.point_mass_at_zero();
    // 1 - u with u in [0, 1) lies in (0, 1]
    let u: f64 = rng.random();
    Ok(PitValue {
        value: atom * T::lit(1.0 - u),
        randomized: true,
    })
}

/// How ties between the observation and ensemble members are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Uniform over all tied positions.
    #[default]
    Random,
    /// Middle tied position (rounded down), for reproducible tables.
    MidRank,
}

/// Rank of `y` within the ensemble, in `1..=m+1`.
pub fn verification_rank<T, R>(members: &[T], y: T, tie_break: TieBreak, rng: &mut R) -> Result<usize, VerificationError>
where
    T: Real,
    R: Rng + ?Sized,
{
    if members.is_empty() {
        return Err(VerificationError::Empty);
    }
    let below = members.iter().filter(|f| **f < y).count();
    let ties = members.iter().filter(|f| **f == y).count();
    let offset = match tie_break {
        TieBreak::Random if ties > 0 => rng.random_range(0..=ties),
        TieBreak::Random => 0,
        TieBreak::MidRank => ties / 2,
    };
    Ok(1 + below + offset)
}

/// Counts of verification ranks `1..=m+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankHistogram {
    pub counts: Vec<usize>,
    pub total: usize,
}

impl RankHistogram {
    pub fn from_ranks(ranks: &[usize], member_count: usize) -> Result<Self, VerificationError> {
        let mut counts = vec![0; member_count + 1];
        for &r in ranks {
            if r == 0 || r > member_count + 1 {
                return Err(VerificationError::InvalidRank {
                    rank: r,
                    max: member_count + 1,
                });
            }
            counts[r - 1] += 1;
        }
        Ok(Self {
            counts,
            total: ranks.len(),
        })
    }
}

/// Equal-width histogram on `[0, 1]`: bin `k` covers `(k/B, (k+1)/B]`, the first bin also includes 0.
pub fn histogram<T: Real>(values: &[T], bins: usize) -> Result<Vec<usize>, VerificationError> {
    if bins == 0 {
        return Err(VerificationError::NoBins);
    }
    let mut counts = vec![0; bins];
    let b = T::from_count(bins);
    for &v in values {
        if !(v >= T::zero() && v <= T::one()) {
            return Err(VerificationError::OutOfUnitInterval(v.as_f64()));
        }
        let k = (v * b).ceil().to_usize().unwrap_or(0).saturating_sub(1).min(bins - 1);
        counts[k] += 1;
    }
    Ok(counts)
}

/// Pearson χ² test of equal expected counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

impl ChiSquareTest {
    pub fn rejects_at(&self, level: f64) -> bool {
        self.p_value < level
    }
}

pub fn chi_square_uniformity(counts: &[usize]) -> Result<ChiSquareTest, VerificationError> {
    let total: usize = counts.iter().sum();
    if counts.len() < 2 || total == 0 {
        return Err(VerificationError::Empty);
    }
    let expected = total as f64 / counts.len() as f64;
    let statistic = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum::<f64>();
    let df = counts.len() - 1;
    Ok(ChiSquareTest {
        statistic,
        df,
        p_value: chi_square_sf(statistic, df),
    })
}

/// One horizontal segment of a CORP reliability diagram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityBin<T> {
    pub forecast_range: (T, T),
    pub fitted_cep: T,
    pub case_count: usize,
}

/// Reliability diagram: PAV segments plus the raw forecast/outcome pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityDiagramData<T> {
    pub bins: Vec<ReliabilityBin<T>>,
    pub pairs: Vec<(T, T)>,
    pub decomposition: BrierDecomposition<T>,
}

pub fn reliability_diagram<T: Real>(probs: &[T], outcomes: &[T]) -> Result<ReliabilityDiagramData<T>, VerificationError> {
    let decomposition = brier_decomposition(probs, outcomes)?;
    let fit = pav_isotonic(probs, outcomes)?;
    let bins = fit
        .blocks
        .iter()
        .map(|b| ReliabilityBin {
            forecast_range: (b.x_lo, b.x_hi),
            fitted_cep: b.value,
            case_count: b.count,
        })
        .collect();
    let pairs = probs.iter().copied().zip(outcomes.iter().copied()).collect();
    Ok(ReliabilityDiagramData {
        bins,
        pairs,
        decomposition,
    })
}
