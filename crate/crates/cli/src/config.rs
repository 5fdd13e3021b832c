//! Run configuration: a flat `key = value` file overridden by command-line flags.

use std::path::PathBuf;

use chi0_emos::emos::DEFAULT_WINDOW;
use chi0_emos::verification::DEFAULT_PIT_BINS;
use chi0_emos::{Family, Quadrature, Simplex, TieBreak};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}: {reason}")]
    Value { key: String, value: String, reason: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: Option<PathBuf>,
    pub out: PathBuf,
    pub window: usize,
    pub families: Vec<Family>,
    pub thresholds: Vec<f64>,
    pub seed: Option<u64>,
    pub warm_start: bool,
    pub tie_break: TieBreakSetting,
    pub pit_bins: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub max_evals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreakSetting {
    Random,
    Midrank,
}

impl TieBreakSetting {
    pub fn name(self) -> &'static str {
        match self {
            Self::Random => "random",
            Self::Midrank => "midrank",
        }
    }
}

impl From<TieBreakSetting> for TieBreak {
    fn from(t: TieBreakSetting) -> Self {
        match t {
            TieBreakSetting::Random => TieBreak::Random,
            TieBreakSetting::Midrank => TieBreak::MidRank,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        let q = Quadrature::default();
        Self {
            data: None,
            out: PathBuf::from("out"),
            window: DEFAULT_WINDOW,
            families: Family::ALL.to_vec(),
            thresholds: vec![5.0, 10.0, 20.0, 30.0],
            seed: None,
            warm_start: false,
            tie_break: TieBreakSetting::Random,
            pit_bins: DEFAULT_PIT_BINS,
            abs_tol: q.abs_tol,
            rel_tol: q.rel_tol,
            max_subdivisions: q.max_subdivisions,
            max_evals: Simplex::default().max_evals,
        }
    }
}

fn value_error(key: &str, value: &str, reason: impl ToString) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

pub fn parse_families(value: &str) -> Result<Vec<Family>, ConfigError> {
    value
        .split(',')
        .map(|s| s.trim().parse::<Family>().map_err(|e| value_error("families", value, e)))
        .collect()
}

pub fn parse_thresholds(value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| value_error("thresholds", value, e)))
        .collect()
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(value_error(key, value, "expected true or false")),
    }
}

fn parse_num<N: std::str::FromStr>(key: &str, value: &str) -> Result<N, ConfigError>
where
    N::Err: std::fmt::Display,
{
    value.parse().map_err(|e| value_error(key, value, e))
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "data" => self.data = Some(PathBuf::from(value)),
            "out" => self.out = PathBuf::from(value),
            "window" => self.window = parse_num(key, value)?,
            "families" => self.families = parse_families(value)?,
            "thresholds" => self.thresholds = parse_thresholds(value)?,
            "seed" => self.seed = Some(parse_num(key, value)?),
            "warm_start" => self.warm_start = parse_bool(key, value)?,
            "tie_break" => {
                self.tie_break = match value {
                    "random" => TieBreakSetting::Random,
                    "midrank" => TieBreakSetting::Midrank,
                    _ => return Err(value_error(key, value, "expected random or midrank")),
                }
            }
            "pit_bins" => self.pit_bins = parse_num(key, value)?,
            "abs_tol" => self.abs_tol = parse_num(key, value)?,
            "rel_tol" => self.rel_tol = parse_num(key, value)?,
            "max_subdivisions" => self.max_subdivisions = parse_num(key, value)?,
            "max_evals" => self.max_evals = parse_num(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Applies every setting of a config file; `#` starts a comment.
    pub fn apply_file_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.window < 2 {
            return Err(ConfigError::Invalid(format!("window must be >= 2, got {}", self.window)));
        }
        if self.families.is_empty() {
            return Err(ConfigError::Invalid("no families selected".into()));
        }
        for (i, f) in self.families.iter().enumerate() {
            if self.families[..i].contains(f) {
                return Err(ConfigError::Invalid(format!("family {f} listed twice")));
            }
        }
        if self.thresholds.is_empty() {
            return Err(ConfigError::Invalid("no thresholds given".into()));
        }
        if self.thresholds.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(ConfigError::Invalid("thresholds must be positive".into()));
        }
        if self.thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ConfigError::Invalid("thresholds must be strictly ascending".into()));
        }
        if self.pit_bins == 0 {
            return Err(ConfigError::Invalid("pit_bins must be >= 1".into()));
        }
        if self.max_evals == 0 {
            return Err(ConfigError::Invalid("max_evals must be >= 1".into()));
        }
        self.quadrature()
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(())
    }

    pub fn quadrature(&self) -> Quadrature {
        Quadrature {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_subdivisions: self.max_subdivisions,
            ..Quadrature::default()
        }
    }

    pub fn simplex(&self) -> Simplex {
        Simplex {
            max_evals: self.max_evals,
            ..Simplex::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_settings_override_defaults() {
        let mut c = RunConfig::default();
        c.apply_file_text("# run\nwindow = 25\nfamilies = chi0, gev0\nthresholds=1,2.5\n\nseed = 7 # fixed\n")
            .unwrap();
        assert_eq!(c.window, 25);
        assert_eq!(c.families, vec![Family::Chi0, Family::Gev0]);
        assert_eq!(c.thresholds, vec![1.0, 2.5]);
        assert_eq!(c.seed, Some(7));
        c.validate().unwrap();
    }

    #[test]
    fn reports_bad_lines() {
        let mut c = RunConfig::default();
        assert_eq!(c.apply_file_text("window 3"), Err(ConfigError::Syntax { line: 1 }));
        assert!(matches!(c.apply_file_text("colour = red"), Err(ConfigError::UnknownKey(_))));
        assert!(matches!(c.apply_file_text("window = -1"), Err(ConfigError::Value { .. })));
    }

    #[test]
    fn validation() {
        let ok = RunConfig::default();
        ok.validate().unwrap();
        let mut c = ok.clone();
        c.window = 1;
        assert!(c.validate().is_err());
        let mut c = ok.clone();
        c.thresholds = vec![10.0, 5.0];
        assert!(c.validate().is_err());
        let mut c = ok.clone();
        c.thresholds = vec![0.0, 5.0];
        assert!(c.validate().is_err());
        let mut c = ok;
        c.families = vec![Family::Chi0, Family::Chi0];
        assert!(c.validate().is_err());
    }
}
