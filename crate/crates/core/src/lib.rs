//! Statistical postprocessing of weather-forecast ensembles with the scaled
//! zero-degrees-of-freedom non-central χ² distribution (Chi0), plus censored
//! shifted gamma (CSG0) and censored GEV (GEV0) benchmarks and a
//! probabilistic verification toolkit.
//!
//! The numerical core is generic over the floating-point type through
//! [`Real`]; the aliases below fix it to `f64` for everyday use.

// `!(a < b)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataset;
pub mod distributions;
pub mod emos;
pub mod numerics;
pub mod optimizer;
pub mod real;
pub mod scoring;
pub mod special;
pub mod synthetic;
pub mod verification;

pub use distributions::{
    Chi0Params, Csg0Params, DistributionError, Family, Gev0Params, Predictive, PredictiveDistribution,
};
pub use emos::{EmosCoefficients, EmosError, EnsembleForecast, RollingConfig, TrainConfig, TrainingWindow};
pub use numerics::{NumericsError, QuadratureSpec};
pub use optimizer::{OptimizeError, SimplexConfig};
pub use real::Real;
pub use scoring::{BrierDecomposition, ScoreReport, ScoringError};
pub use verification::{PitValue, RankHistogram, TieBreak, VerificationError};

/// Chi0 parameters in double precision.
pub type Chi0 = Chi0Params<f64>;
/// CSG0 parameters in double precision.
pub type Csg0 = Csg0Params<f64>;
/// GEV0 parameters in double precision.
pub type Gev0 = Gev0Params<f64>;
pub type Predictive64 = PredictiveDistribution<f64>;
pub type Coefficients = EmosCoefficients<f64>;
pub type Ensemble = EnsembleForecast<f64>;
pub type Dataset = dataset::ForecastDataset<f64>;
pub type Quadrature = QuadratureSpec<f64>;
pub type Simplex = SimplexConfig<f64>;
