//! Synthetic ensemble/observation series with a known Chi0 link, used for
//! recovery experiments and demos.

use chrono::{Duration, NaiveDate};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::dataset::{DailyRecord, StationSeries};
use crate::distributions::{Chi0Params, Predictive};
use crate::emos::{link_chi0, EmosCoefficients, EnsembleForecast};
use crate::distributions::Family;

/// Generator settings. Observations follow the Chi0 link given by `truth`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub days: usize,
    pub member_count: usize,
    pub start: NaiveDate,
    /// Probability that every member of a day is zero.
    pub dry_fraction: f64,
    /// Gamma shape and scale of the daily forecast intensity.
    pub intensity_shape: f64,
    pub intensity_scale: f64,
    /// Lognormal spread of members around the daily intensity.
    pub member_spread: f64,
    pub truth: EmosCoefficients<f64>,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            days: 200,
            member_count: 50,
            start: NaiveDate::from_ymd_opt(2019, 1, 1).expect("valid date"),
            dry_fraction: 0.12,
            intensity_shape: 1.2,
            intensity_scale: 2.5,
            member_spread: 0.35,
            // λ = 0.25 + f̄, σ = 1 + 0.5 s_f
            truth: EmosCoefficients {
                a: 0.5,
                b: 1.0,
                c: 1.0,
                d: 0.5f64.sqrt(),
                family: Family::Chi0,
                extra: 0.0,
            },
        }
    }
}

/// Generated station series plus the distribution each observation was drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticStation {
    pub series: StationSeries<f64>,
    pub truth: Vec<Chi0Params<f64>>,
}

pub fn generate_station<R: Rng + ?Sized>(id: &str, config: &SyntheticConfig, rng: &mut R) -> SyntheticStation {
    let intensity = Gamma::new(config.intensity_shape, config.intensity_scale).expect("valid intensity gamma");
    let mut records = Vec::with_capacity(config.days);
    let mut truth = Vec::with_capacity(config.days);
    for day in 0..config.days {
        let members: Vec<f64> = if rng.random::<f64>() < config.dry_fraction {
            vec![0.0; config.member_count]
        } else {
            let level: f64 = intensity.sample(rng);
            (0..config.member_count)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    (level * (config.member_spread * z).exp() - 0.3).max(0.0)
                })
                .collect()
        };
        let forecast = EnsembleForecast::new(members.clone()).expect("nonnegative members");
        let dist = link_chi0(&config.truth, &forecast).expect("valid truth link");
        let observation = dist.sample_one(rng);
        records.push(DailyRecord {
            date: config.start + Duration::days(day as i64),
            observation,
            members,
        });
        truth.push(dist);
    }
    SyntheticStation {
        series: StationSeries {
            id: id.to_string(),
            records,
        },
        truth,
    }
}
