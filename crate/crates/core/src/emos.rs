//! EMOS training and prediction.
//!
//! Ensemble mean `f̄` and standard deviation `s_f` are linked to the
//! predictive distribution through squared coefficients,
//!
//! ```text
//! λ = a² + b²·f̄        σ = c² + d²·s_f
//! ```
//!
//! for Chi0, and through the same expressions as the mean and standard
//! deviation of the benchmark families. Coefficients are fitted by
//! minimizing the mean CRPS over a rolling window of past days. When every
//! member is zero the link collapses to `(a², c²)` without any indicator.

use chrono::NaiveDate;
use log::{debug, warn};
use thiserror::Error;

use crate::dataset::{DailyRecord, ForecastDataset};
use crate::distributions::{
    Chi0Params, Csg0Params, DistributionError, Family, Gev0Params, PredictiveDistribution, GEV0_MAX_SHAPE,
};
use crate::numerics::QuadratureSpec;
use crate::optimizer::{minimize, OptimizeError, SimplexConfig};
use crate::real::Real;
use crate::scoring::crps_distribution;

/// Lower bound applied to linked scale / standard deviation parameters.
pub const SCALE_FLOOR: f64 = 1e-8;
/// Default length of the rolling training period in days.
pub const DEFAULT_WINDOW: usize = 30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmosError {
    #[error("ensemble must have at least one member")]
    EmptyEnsemble,
    #[error("ensemble member {0} must be finite and >= 0")]
    InvalidMember(f64),
    #[error("observation {0} must be finite and >= 0")]
    InvalidObservation(f64),
    #[error("training window is empty")]
    EmptyWindow,
    #[error("coefficient vector has length {found}, expected {expected} for {family}")]
    CoefficientLength { family: Family, found: usize, expected: usize },
    #[error("invalid coefficient {name} = {value}")]
    InvalidCoefficient { name: &'static str, value: f64 },
    #[error("coefficients are for {found}, expected {expected}")]
    FamilyMismatch { found: Family, expected: Family },
    #[error("linked mean {0} is not positive; cannot moment-match")]
    NonPositiveMean(f64),
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error("training failed: {0}")]
    Optimize(#[from] OptimizeError),
    #[error("station {0} not found")]
    UnknownStation(String),
    #[error("station {station} has no run of {needed} consecutive days")]
    InsufficientData { station: String, needed: usize },
    #[error("window size must be at least 2, got {0}")]
    WindowSize(usize),
}

/// One forecast case: members and their summary statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleForecast<T> {
    members: Vec<T>,
    mean: T,
    sd: T,
    all_zero: bool,
}

impl<T: Real> EnsembleForecast<T> {
    pub fn new(members: Vec<T>) -> Result<Self, EmosError> {
        if members.is_empty() {
            return Err(EmosError::EmptyEnsemble);
        }
        if let Some(v) = members.iter().find(|v| !(v.is_finite() && **v >= T::zero())) {
            return Err(EmosError::InvalidMember(v.as_f64()));
        }
        let m = members.len();
        let mean = members.iter().copied().sum::<T>() / T::from_count(m);
        let sd = if m > 1 {
            let ss = members.iter().map(|v| (*v - mean) * (*v - mean)).sum::<T>();
            (ss / T::from_count(m - 1)).sqrt()
        } else {
            T::zero()
        };
        let all_zero = members.iter().all(|v| *v == T::zero());
        Ok(Self { members, mean, sd, all_zero })
    }

    pub fn members(&self) -> &[T] {
        &self.members
    }

    /// Ensemble mean `f̄`.
    pub fn mean(&self) -> T {
        self.mean
    }

    /// Ensemble standard deviation `s_f` (divisor `m - 1`).
    pub fn sd(&self) -> T {
        self.sd
    }

    pub fn all_zero(&self) -> bool {
        self.all_zero
    }
}

/// Trainable link coefficients.
///
/// `extra` is the family constant fitted alongside `(a, b, c, d)`: the GEV0
/// shape ξ or the CSG0 shift δ. It is ignored for Chi0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmosCoefficients<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
    pub family: Family,
    pub extra: T,
}

fn check_extra<T: Real>(family: Family, extra: T) -> Result<(), EmosError> {
    let ok = match family {
        Family::Chi0 => extra.is_finite(),
        Family::Csg0 => extra.is_finite() && extra >= T::zero(),
        Family::Gev0 => extra >= T::zero() && extra < T::lit(GEV0_MAX_SHAPE),
    };
    if ok {
        Ok(())
    } else {
        Err(EmosError::InvalidCoefficient {
            name: match family {
                Family::Chi0 => "extra",
                Family::Csg0 => "shift",
                Family::Gev0 => "shape",
            },
            value: extra.as_f64(),
        })
    }
}

impl<T: Real> EmosCoefficients<T> {
    pub fn new(family: Family, a: T, b: T, c: T, d: T, extra: T) -> Result<Self, EmosError> {
        for (name, v) in [("a", a), ("b", b), ("c", c), ("d", d)] {
            if !v.is_finite() {
                return Err(EmosError::InvalidCoefficient { name, value: v.as_f64() });
            }
        }
        check_extra(family, extra)?;
        Ok(Self { a, b, c, d, family, extra })
    }

    /// Starting values `a = 0.5`, `b = c = d = 1` (ξ = 0.1 for GEV0, δ = 0.5 for CSG0).
    pub fn starting(family: Family) -> Self {
        let extra = match family {
            Family::Chi0 => T::zero(),
            Family::Csg0 => T::lit(0.5),
            Family::Gev0 => T::lit(0.1),
        };
        Self {
            a: T::lit(0.5),
            b: T::one(),
            c: T::one(),
            d: T::one(),
            family,
            extra,
        }
    }

    /// Optimizer vector: `[a, b, c, d]`, plus the extra constant for the benchmarks.
    pub fn to_raw(&self) -> Vec<T> {
        let mut v = vec![self.a, self.b, self.c, self.d];
        if self.family != Family::Chi0 {
            v.push(self.extra);
        }
        v
    }

    pub fn raw_len(family: Family) -> usize {
        if family == Family::Chi0 {
            4
        } else {
            5
        }
    }

    pub fn from_raw(family: Family, raw: &[T]) -> Result<Self, EmosError> {
        let expected = Self::raw_len(family);
        if raw.len() != expected {
            return Err(EmosError::CoefficientLength {
                family,
                found: raw.len(),
                expected,
            });
        }
        let extra = raw.get(4).copied().unwrap_or_else(T::zero);
        Self::new(family, raw[0], raw[1], raw[2], raw[3], extra)
    }

    /// Location-type and spread-type parameters `(a² + b²f̄, max(c² + d²s_f, floor))`.
    pub fn linked_pair(&self, forecast: &EnsembleForecast<T>) -> (T, T) {
        let first = self.a * self.a + self.b * self.b * forecast.mean;
        let second = (self.c * self.c + self.d * self.d * forecast.sd).max(T::lit(SCALE_FLOOR));
        (first, second)
    }

    /// Predictive distribution for one forecast case.
    pub fn link(&self, forecast: &EnsembleForecast<T>) -> Result<PredictiveDistribution<T>, EmosError> {
        match self.family {
            Family::Chi0 => link_chi0(self, forecast).map(Into::into),
            _ => link_benchmark(self, forecast),
        }
    }
}

/// Chi0 link `λ = a² + b²f̄`, `σ = c² + d²s_f` (σ floored at [`SCALE_FLOOR`]).
pub fn link_chi0<T: Real>(coeffs: &EmosCoefficients<T>, forecast: &EnsembleForecast<T>) -> Result<Chi0Params<T>, EmosError> {
    if coeffs.family != Family::Chi0 {
        return Err(EmosError::FamilyMismatch {
            found: coeffs.family,
            expected: Family::Chi0,
        });
    }
    let (lambda, sigma) = coeffs.linked_pair(forecast);
    Ok(Chi0Params::new(lambda, sigma)?)
}

/// Benchmark link: the same linear forms give the distribution's mean and
/// standard deviation, which are then moment-matched.
///
/// CSG0 matches the uncensored gamma (`k = mean²/sd²`, `θ = sd²/mean`) and
/// takes δ from `extra`; GEV0 solves location and scale for the uncensored
/// GEV given ξ = `extra`.
pub fn link_benchmark<T: Real>(
    coeffs: &EmosCoefficients<T>,
    forecast: &EnsembleForecast<T>,
) -> Result<PredictiveDistribution<T>, EmosError> {
    let (mean, sd) = coeffs.linked_pair(forecast);
    match coeffs.family {
        Family::Chi0 => Err(EmosError::FamilyMismatch {
            found: Family::Chi0,
            expected: Family::Csg0,
        }),
        Family::Csg0 => {
            if !(mean > T::zero()) {
                return Err(EmosError::NonPositiveMean(mean.as_f64()));
            }
            Ok(Csg0Params::from_mean_sd(mean, sd, coeffs.extra)?.into())
        }
        Family::Gev0 => Ok(Gev0Params::from_mean_sd(mean, sd, coeffs.extra)?.into()),
    }
}

/// Consecutive training cases for one fit.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingWindow<T> {
    cases: Vec<(EnsembleForecast<T>, T)>,
}

impl<T: Real> TrainingWindow<T> {
    pub fn new(cases: Vec<(EnsembleForecast<T>, T)>) -> Result<Self, EmosError> {
        if cases.is_empty() {
            return Err(EmosError::EmptyWindow);
        }
        if let Some((_, y)) = cases.iter().find(|(_, y)| !(y.is_finite() && *y >= T::zero())) {
            return Err(EmosError::InvalidObservation(y.as_f64()));
        }
        Ok(Self { cases })
    }

    pub fn from_records(records: &[DailyRecord<T>]) -> Result<Self, EmosError> {
        let cases = records
            .iter()
            .map(|r| Ok((EnsembleForecast::new(r.members.clone())?, r.observation)))
            .collect::<Result<Vec<_>, EmosError>>()?;
        Self::new(cases)
    }

    pub fn cases(&self) -> &[(EnsembleForecast<T>, T)] {
        &self.cases
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }
}

/// Settings of a single window fit.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig<T> {
    pub simplex: SimplexConfig<T>,
    pub quadrature: QuadratureSpec<T>,
    /// Force `b = d = 0` so the fit ignores the ensemble (constant climatology).
    pub climatology: bool,
}

impl<T: Real> Default for TrainConfig<T> {
    fn default() -> Self {
        Self {
            simplex: SimplexConfig::default(),
            quadrature: QuadratureSpec::default(),
            climatology: false,
        }
    }
}

/// Mean CRPS over the window for a raw coefficient vector; `+∞` when the
/// vector violates the family constraints or a score cannot be computed.
pub fn mean_crps_objective<T: Real>(raw: &[T], window: &TrainingWindow<T>, family: Family, spec: &QuadratureSpec<T>) -> T {
    match EmosCoefficients::from_raw(family, raw) {
        Ok(coeffs) => window_mean_crps(&coeffs, window, spec),
        Err(_) => T::infinity(),
    }
}

/// Mean CRPS of fixed coefficients over the window (`+∞` on failure).
pub fn window_mean_crps<T: Real>(coeffs: &EmosCoefficients<T>, window: &TrainingWindow<T>, spec: &QuadratureSpec<T>) -> T {
    let mut total = T::zero();
    for (forecast, y) in &window.cases {
        let Ok(dist) = coeffs.link(forecast) else {
            return T::infinity();
        };
        match crps_distribution(&dist, *y, spec) {
            Ok(score) => total = total + score,
            Err(e) => {
                warn!("CRPS evaluation failed for {dist:?} at y = {y}: {e}");
                return T::infinity();
            }
        }
    }
    total / T::from_count(window.len())
}

/// Free coordinates of the optimizer vector.
fn free_indices(family: Family, climatology: bool) -> Vec<usize> {
    let mut idx = if climatology { vec![0, 2] } else { vec![0, 1, 2, 3] };
    if family != Family::Chi0 {
        idx.push(4);
    }
    idx
}

fn expand<T: Real>(free: &[T], template: &[T], indices: &[usize]) -> Vec<T> {
    let mut full = template.to_vec();
    for (v, &i) in free.iter().zip(indices) {
        full[i] = *v;
    }
    full
}

/// Convergence information for one window fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainDiagnostics<T> {
    pub converged: bool,
    pub evals: usize,
    pub start_objective: T,
    pub final_objective: T,
}

/// Fits coefficients on one window by Nelder–Mead minimization of the mean CRPS.
pub fn train_window<T: Real>(
    window: &TrainingWindow<T>,
    family: Family,
    start: &EmosCoefficients<T>,
    config: &TrainConfig<T>,
) -> Result<(EmosCoefficients<T>, TrainDiagnostics<T>), EmosError> {
    if start.family != family {
        return Err(EmosError::FamilyMismatch {
            found: start.family,
            expected: family,
        });
    }
    let mut template = start.to_raw();
    if config.climatology {
        template[1] = T::zero();
        template[3] = T::zero();
    }
    let indices = free_indices(family, config.climatology);
    let free_start: Vec<T> = indices.iter().map(|&i| template[i]).collect();
    let objective = |free: &[T]| mean_crps_objective(&expand(free, &template, &indices), window, family, &config.quadrature);

    let start_objective = mean_crps_objective(&template, window, family, &config.quadrature);
    let result = minimize(objective, &free_start, &config.simplex)?;
    let fitted = EmosCoefficients::from_raw(family, &expand(&result.argmin, &template, &indices))?;
    if !result.converged {
        debug!("{family} window fit stopped after {} evaluations without converging", result.evals);
    }
    Ok((
        fitted,
        TrainDiagnostics {
            converged: result.converged,
            evals: result.evals,
            start_objective,
            final_objective: result.value,
        },
    ))
}

/// Settings of a rolling-window run.
#[derive(Debug, Clone, PartialEq)]
pub struct RollingConfig<T> {
    pub window_size: usize,
    /// Start each window from the previous optimum instead of the fixed starting values.
    pub warm_start: bool,
    pub train: TrainConfig<T>,
}

impl<T: Real> Default for RollingConfig<T> {
    fn default() -> Self {
        Self {
            window_size: DEFAULT_WINDOW,
            warm_start: false,
            train: TrainConfig::default(),
        }
    }
}

/// One out-of-sample prediction of a rolling run.
#[derive(Debug, Clone, PartialEq)]
pub struct RollingPrediction<T> {
    pub date: NaiveDate,
    pub forecast: EnsembleForecast<T>,
    pub observation: T,
    pub distribution: PredictiveDistribution<T>,
    pub coefficients: EmosCoefficients<T>,
    pub diagnostics: TrainDiagnostics<T>,
}

/// Indices of records that are preceded by `window_size` consecutive calendar days.
pub fn verification_days<T>(records: &[DailyRecord<T>], window_size: usize) -> Vec<usize> {
    let mut days = Vec::new();
    // length of the consecutive run ending at the current record
    let mut run = 0usize;
    for (t, r) in records.iter().enumerate() {
        let consecutive = t > 0 && records[t - 1].date.succ_opt() == Some(r.date);
        run = if consecutive { run + 1 } else { 1 };
        if run > window_size {
            days.push(t);
        }
    }
    days
}

/// Rolling out-of-sample forecasts for one station: every day preceded by
/// `window_size` consecutive days is predicted from coefficients trained on
/// exactly those days. A gap in the dates restarts the window.
pub fn rolling_forecast<T: Real>(
    dataset: &ForecastDataset<T>,
    station: &str,
    family: Family,
    config: &RollingConfig<T>,
) -> Result<Vec<RollingPrediction<T>>, EmosError> {
    let series = dataset
        .station(station)
        .ok_or_else(|| EmosError::UnknownStation(station.to_string()))?;
    rolling_forecast_records(&series.records, station, family, config)
}

pub fn rolling_forecast_records<T: Real>(
    records: &[DailyRecord<T>],
    station: &str,
    family: Family,
    config: &RollingConfig<T>,
) -> Result<Vec<RollingPrediction<T>>, EmosError> {
    let w = config.window_size;
    if w < 2 {
        return Err(EmosError::WindowSize(w));
    }
    let days = verification_days(records, w);
    if days.is_empty() {
        return Err(EmosError::InsufficientData {
            station: station.to_string(),
            needed: w + 1,
        });
    }
    let mut out: Vec<RollingPrediction<T>> = Vec::with_capacity(days.len());
    let mut previous: Option<(usize, EmosCoefficients<T>)> = None;
    for &t in &days {
        let window = TrainingWindow::from_records(&records[t - w..t])?;
        let start = match previous {
            Some((prev_t, coeffs)) if config.warm_start && prev_t + 1 == t => coeffs,
            _ => EmosCoefficients::starting(family),
        };
        let (coefficients, diagnostics) = train_window(&window, family, &start, &config.train)?;
        let forecast = EnsembleForecast::new(records[t].members.clone())?;
        let distribution = coefficients.link(&forecast)?;
        previous = Some((t, coefficients));
        out.push(RollingPrediction {
            date: records[t].date,
            forecast,
            observation: records[t].observation,
            distribution,
            coefficients,
            diagnostics,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Predictive;

    fn ens(members: &[f64]) -> EnsembleForecast<f64> {
        EnsembleForecast::new(members.to_vec()).unwrap()
    }

    fn chi_coeffs(a: f64, b: f64, c: f64, d: f64) -> EmosCoefficients<f64> {
        EmosCoefficients::new(Family::Chi0, a, b, c, d, 0.0).unwrap()
    }

    #[test]
    fn ensemble_statistics() {
        let e = ens(&[1.0, 2.0, 3.0, 6.0]);
        assert_eq!(e.mean(), 3.0);
        assert!((e.sd() - (14.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!(!e.all_zero());
        let z = ens(&[0.0; 50]);
        assert!(z.all_zero() && z.mean() == 0.0 && z.sd() == 0.0);
        assert_eq!(ens(&[2.0]).sd(), 0.0);
        assert!(EnsembleForecast::<f64>::new(vec![]).is_err());
        assert!(EnsembleForecast::new(vec![-1.0]).is_err());
    }

    #[test]
    fn chi0_link_by_hand() {
        // f̄ = 2, s_f = 1
        let e = ens(&[1.0, 2.0, 3.0]);
        let p = link_chi0(&chi_coeffs(0.5, 1.0, 1.0, 1.0), &e).unwrap();
        assert_eq!((p.lambda(), p.sigma()), (2.25, 2.0));
    }

    #[test]
    fn split_case_ignores_b_and_d() {
        let z = ens(&[0.0; 50]);
        let base = link_chi0(&chi_coeffs(0.7, 1.0, 1.3, 1.0), &z).unwrap();
        assert_eq!(base.lambda(), 0.7 * 0.7);
        assert_eq!(base.sigma(), 1.3 * 1.3);
        for &(b, d) in &[(0.0, 0.0), (5.0, -3.0), (1e6, 1e-6)] {
            let other = link_chi0(&chi_coeffs(0.7, b, 1.3, d), &z).unwrap();
            assert_eq!(other.lambda().to_bits(), base.lambda().to_bits());
            assert_eq!(other.sigma().to_bits(), base.sigma().to_bits());
        }
    }

    #[test]
    fn degenerate_link_is_constant() {
        let c = chi_coeffs(0.6, 0.0, 1.1, 0.0);
        let p1 = link_chi0(&c, &ens(&[0.0, 3.0, 9.0])).unwrap();
        let p2 = link_chi0(&c, &ens(&[20.0, 30.0])).unwrap();
        assert_eq!(p1, p2);
    }

    #[test]
    fn signs_do_not_matter() {
        let e = ens(&[0.5, 2.5, 4.0]);
        let base = link_chi0(&chi_coeffs(0.3, 0.8, 1.2, 0.4), &e).unwrap();
        let flipped = link_chi0(&chi_coeffs(-0.3, -0.8, -1.2, -0.4), &e).unwrap();
        assert_eq!(base, flipped);
    }

    #[test]
    fn sigma_floor() {
        let p = link_chi0(&chi_coeffs(1.0, 1.0, 0.0, 1.0), &ens(&[0.0; 5])).unwrap();
        assert_eq!(p.sigma(), SCALE_FLOOR);
    }

    #[test]
    fn benchmark_links() {
        // mean = 4, sd = 2 with a = 2, b = 0, c = sqrt(2), d = 0
        let c = EmosCoefficients::new(Family::Csg0, 2.0, 0.0, 2f64.sqrt(), 0.0, 0.0).unwrap();
        match link_benchmark(&c, &ens(&[1.0, 5.0])).unwrap() {
            PredictiveDistribution::Csg0(p) => {
                assert!((p.shape() - 4.0).abs() < 1e-12 && (p.scale() - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let g = EmosCoefficients::new(Family::Gev0, 2.0, 0.0, 2f64.sqrt(), 0.0, 0.0).unwrap();
        match link_benchmark(&g, &ens(&[1.0, 5.0])).unwrap() {
            PredictiveDistribution::Gev0(p) => {
                let scale = 2.0 * 6f64.sqrt() / std::f64::consts::PI;
                assert!((p.scale() - scale).abs() < 1e-12);
                assert!((p.location() - (4.0 - crate::special::EULER_GAMMA * scale)).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let zero_mean = EmosCoefficients::new(Family::Csg0, 0.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        assert!(matches!(
            link_benchmark(&zero_mean, &ens(&[0.0, 0.0])),
            Err(EmosError::NonPositiveMean(_))
        ));
    }

    #[test]
    fn coefficient_validation() {
        assert!(EmosCoefficients::new(Family::Gev0, 0.5, 1.0, 1.0, 1.0, 0.5).is_err());
        assert!(EmosCoefficients::new(Family::Csg0, 0.5, 1.0, 1.0, 1.0, -0.1).is_err());
        assert!(EmosCoefficients::new(Family::Chi0, f64::NAN, 1.0, 1.0, 1.0, 0.0).is_err());
        let s = EmosCoefficients::<f64>::starting(Family::Gev0);
        assert_eq!(EmosCoefficients::from_raw(Family::Gev0, &s.to_raw()).unwrap(), s);
        assert!(EmosCoefficients::<f64>::from_raw(Family::Chi0, &[1.0; 5]).is_err());
    }

    #[test]
    fn penalty_for_infeasible_extras() {
        let window = TrainingWindow::new(vec![(ens(&[1.0, 2.0]), 1.0)]).unwrap();
        let spec = QuadratureSpec::default();
        assert!(mean_crps_objective(&[0.5, 1.0, 1.0, 1.0, 0.7], &window, Family::Gev0, &spec).is_infinite());
        assert!(mean_crps_objective(&[0.5, 1.0, 1.0, 1.0, -1.0], &window, Family::Csg0, &spec).is_infinite());
        assert!(mean_crps_objective(&[0.5, 1.0, 1.0, 1.0, 0.1], &window, Family::Gev0, &spec).is_finite());
    }

    #[test]
    fn objective_shrinks_toward_point_mass() {
        let window = TrainingWindow::new(vec![(ens(&[0.0; 10]), 0.0); 5]).unwrap();
        let spec = QuadratureSpec::default();
        let at = |a: f64| mean_crps_objective(&[a, 1.0, 1.0, 1.0], &window, Family::Chi0, &spec);
        assert!(at(1.0) > at(0.5) && at(0.5) > at(0.1) && at(0.1) > at(0.01));
        assert!(at(1e-4) < 1e-7);
    }

    #[test]
    fn all_zero_window_fits_point_mass() {
        let window = TrainingWindow::new(vec![(ens(&[0.0; 10]), 0.0); 30]).unwrap();
        let start = EmosCoefficients::starting(Family::Chi0);
        let (fit, diag) = train_window(&window, Family::Chi0, &start, &TrainConfig::default()).unwrap();
        assert!(diag.final_objective <= diag.start_objective);
        assert!(diag.final_objective < 1e-6, "{diag:?}");
        let p = link_chi0(&fit, &ens(&[0.0; 10])).unwrap();
        assert!(p.moments().0 < 1e-3, "{fit:?}");
        assert!(p.point_mass_at_zero() > 0.999);
    }

    #[test]
    fn training_rejects_mismatched_start() {
        let window = TrainingWindow::new(vec![(ens(&[1.0]), 1.0)]).unwrap();
        let start = EmosCoefficients::starting(Family::Gev0);
        assert!(train_window(&window, Family::Chi0, &start, &TrainConfig::default()).is_err());
        assert!(TrainingWindow::<f64>::new(vec![]).is_err());
        assert!(TrainingWindow::new(vec![(ens(&[1.0]), -1.0)]).is_err());
    }

    fn day(offset: i64) -> NaiveDate {
        NaiveDate::from_ymd_opt(2021, 1, 1).unwrap() + chrono::Duration::days(offset)
    }

    fn records(offsets: &[i64]) -> Vec<DailyRecord<f64>> {
        offsets
            .iter()
            .map(|&o| DailyRecord {
                date: day(o),
                observation: (o % 3) as f64,
                members: vec![(o % 4) as f64, (o % 5) as f64, 1.0],
            })
            .collect()
    }

    #[test]
    fn verification_day_bookkeeping() {
        let full: Vec<i64> = (0..40).collect();
        assert_eq!(verification_days(&records(&full), 30), (30..40).collect::<Vec<_>>());
        // gap after day 9: window must refill from day 10
        let gappy: Vec<i64> = (0..10).chain(11..45).collect();
        let days = verification_days(&records(&gappy), 30);
        assert_eq!(days.first().copied(), Some(40));
        assert_eq!(days.len(), 4);
        assert!(verification_days(&records(&full[..30]), 30).is_empty());
    }

    #[test]
    fn rolling_minimal_series() {
        let recs = records(&(0..31).collect::<Vec<_>>());
        let ds = ForecastDataset::new(
            3,
            vec![crate::dataset::StationSeries { id: "S".into(), records: recs }],
        )
        .unwrap();
        let mut cfg = RollingConfig::default();
        cfg.train.simplex.max_evals = 40;
        let preds = rolling_forecast(&ds, "S", Family::Chi0, &cfg).unwrap();
        assert_eq!(preds.len(), 1);
        assert_eq!(preds[0].date, day(30));
        assert!(preds[0].diagnostics.final_objective <= preds[0].diagnostics.start_objective);
        assert!(rolling_forecast(&ds, "missing", Family::Chi0, &cfg).is_err());
        let short = ForecastDataset::new(
            3,
            vec![crate::dataset::StationSeries { id: "S".into(), records: records(&(0..30).collect::<Vec<_>>()) }],
        )
        .unwrap();
        assert!(matches!(
            rolling_forecast(&short, "S", Family::Chi0, &cfg),
            Err(EmosError::InsufficientData { .. })
        ));
    }
}
