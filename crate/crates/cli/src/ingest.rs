//! Reader for the `station,date,obs,m1..mK` forecast CSV layout.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use chi0_emos::dataset::{DailyRecord, ForecastDataset, StationSeries};
use chrono::NaiveDate;
use log::warn;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Open { path: String, source: csv::Error },
    #[error("malformed header: {0}")]
    Header(String),
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("row {row}: csv error: {source}")]
    Csv { row: usize, source: csv::Error },
    #[error("no complete rows")]
    Empty,
}

/// Parsed dataset plus the number of rows dropped for missing fields.
#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub dataset: ForecastDataset<f64>,
    pub dropped_rows: usize,
}

pub fn ingest_csv(path: &Path) -> Result<Ingested, IngestError> {
    let reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| IngestError::Open {
            path: path.display().to_string(),
            source,
        })?;
    read_dataset(reader)
}

pub fn ingest_reader<R: Read>(input: R) -> Result<Ingested, IngestError> {
    let reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    read_dataset(reader)
}

fn member_count(header: &csv::StringRecord) -> Result<usize, IngestError> {
    let fields: Vec<&str> = header.iter().collect();
    if fields.len() < 4 || fields[..3] != ["station", "date", "obs"] {
        return Err(IngestError::Header(format!(
            "expected station,date,obs,m1..mK, found {}",
            fields.join(",")
        )));
    }
    for (k, name) in fields[3..].iter().enumerate() {
        if *name != format!("m{}", k + 1) {
            return Err(IngestError::Header(format!("column {} is {name:?}, expected m{}", k + 4, k + 1)));
        }
    }
    Ok(fields.len() - 3)
}

fn parse_value(field: &str, what: &str, row: usize) -> Result<f64, IngestError> {
    let v: f64 = field.parse().map_err(|_| IngestError::Row {
        row,
        message: format!("{what} {field:?} is not a number"),
    })?;
    if !(v.is_finite() && v >= 0.0) {
        return Err(IngestError::Row {
            row,
            message: format!("{what} {v} must be finite and >= 0"),
        });
    }
    Ok(v)
}

fn read_dataset<R: Read>(mut reader: csv::Reader<R>) -> Result<Ingested, IngestError> {
    let header = reader
        .headers()
        .map_err(|source| IngestError::Csv { row: 1, source })?
        .clone();
    let m = member_count(&header)?;

    let mut stations: Vec<StationSeries<f64>> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut dropped = 0;
    for (i, result) in reader.records().enumerate() {
        // header is row 1
        let row = i + 2;
        let record = result.map_err(|source| IngestError::Csv { row, source })?;
        if record.len() != m + 3 || record.iter().any(str::is_empty) {
            dropped += 1;
            continue;
        }
        let station = &record[0];
        let date = NaiveDate::parse_from_str(&record[1], "%Y-%m-%d").map_err(|e| IngestError::Row {
            row,
            message: format!("date {:?}: {e}", &record[1]),
        })?;
        let observation = parse_value(&record[2], "obs", row)?;
        let members = (0..m)
            .map(|k| parse_value(&record[k + 3], &format!("m{}", k + 1), row))
            .collect::<Result<Vec<_>, _>>()?;

        let slot = *index.entry(station.to_string()).or_insert_with(|| {
            stations.push(StationSeries {
                id: station.to_string(),
                records: Vec::new(),
            });
            stations.len() - 1
        });
        let series = &mut stations[slot];
        if let Some(last) = series.records.last() {
            if date <= last.date {
                return Err(IngestError::Row {
                    row,
                    message: format!("station {station}: date {date} does not follow {}", last.date),
                });
            }
        }
        series.records.push(DailyRecord {
            date,
            observation,
            members,
        });
    }
    if dropped > 0 {
        warn!("dropped {dropped} row(s) with missing fields");
    }
    if stations.is_empty() {
        return Err(IngestError::Empty);
    }
    let dataset = ForecastDataset::new(m, stations).map_err(|e| IngestError::Row {
        row: 0,
        message: e.to_string(),
    })?;
    Ok(Ingested {
        dataset,
        dropped_rows: dropped,
    })
}
