//! Station time series of observations paired with ensemble forecasts.

use std::io::{self, Write};

use chrono::NaiveDate;
use thiserror::Error;

use crate::real::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("station {station}: dates not strictly increasing at {date}")]
    NonMonotoneDates { station: String, date: NaiveDate },
    #[error("station {station}, {date}: {what} {value} must be finite and >= 0")]
    InvalidValue {
        station: String,
        date: NaiveDate,
        what: &'static str,
        value: f64,
    },
    #[error("station {station}, {date}: {found} members, expected {expected}")]
    MemberCount {
        station: String,
        date: NaiveDate,
        found: usize,
        expected: usize,
    },
    #[error("member count must be at least 1")]
    NoMembers,
}

/// One forecast day: verifying observation and the ensemble members.
#[derive(Debug, Clone, PartialEq)]
pub struct DailyRecord<T> {
    pub date: NaiveDate,
    pub observation: T,
    pub members: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationSeries<T> {
    pub id: String,
    pub records: Vec<DailyRecord<T>>,
}

/// Station-indexed collection of daily records sharing one ensemble size.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastDataset<T> {
    pub member_count: usize,
    pub stations: Vec<StationSeries<T>>,
}

impl<T: Real> ForecastDataset<T> {
    /// Builds a dataset and checks its invariants.
    pub fn new(member_count: usize, stations: Vec<StationSeries<T>>) -> Result<Self, DatasetError> {
        let ds = Self { member_count, stations };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.member_count == 0 {
            return Err(DatasetError::NoMembers);
        }
        for st in &self.stations {
            let mut prev: Option<NaiveDate> = None;
            for r in &st.records {
                if prev.is_some_and(|p| r.date <= p) {
                    return Err(DatasetError::NonMonotoneDates {
                        station: st.id.clone(),
                        date: r.date,
                    });
                }
                prev = Some(r.date);
                if r.members.len() != self.member_count {
                    return Err(DatasetError::MemberCount {
                        station: st.id.clone(),
                        date: r.date,
                        found: r.members.len(),
                        expected: self.member_count,
                    });
                }
                let bad = |v: T| !(v.is_finite() && v >= T::zero());
                if bad(r.observation) {
                    return Err(DatasetError::InvalidValue {
                        station: st.id.clone(),
                        date: r.date,
                        what: "observation",
                        value: r.observation.as_f64(),
                    });
                }
                if let Some(v) = r.members.iter().copied().find(|v| bad(*v)) {
                    return Err(DatasetError::InvalidValue {
                        station: st.id.clone(),
                        date: r.date,
                        what: "member",
                        value: v.as_f64(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn station(&self, id: &str) -> Option<&StationSeries<T>> {
        self.stations.iter().find(|s| s.id == id)
    }

    /// Writes the `station,date,obs,m1..mK` CSV layout, values at full precision.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "station,date,obs")?;
        for k in 1..=self.member_count {
            write!(out, ",m{k}")?;
        }
        writeln!(out)?;
        for st in &self.stations {
            for r in &st.records {
                write!(out, "{},{},{}", st.id, r.date.format("%Y-%m-%d"), r.observation)?;
                for m in &r.members {
                    write!(out, ",{m}")?;
                }
                writeln!(out)?;
            }
        }
        Ok(())
    }
}
