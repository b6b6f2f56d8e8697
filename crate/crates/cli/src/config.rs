//! Run configuration.
//!
//! The file format is one `key = value` pair per line. Blank lines and
//! lines starting with `#` are ignored, keys are case-sensitive and a key
//! may appear once. Recognised keys:
//!
//! | key                      | default       |
//! |--------------------------|---------------|
//! | `window_minutes`         | 60            |
//! | `stride_minutes`         | 1             |
//! | `condition_threshold`    | 1e8           |
//! | `min_regressor_variance` | 1e-12         |
//! | `fixed_beta`             | 409           |
//! | `beta_unit`              | mw_per_0p1hz  |
//! | `band_nominal_hz`        | 60            |
//! | `band_half_width_hz`     | 0.036         |
//! | `price_up`               | 10            |
//! | `price_down`             | 10            |
//! | `hours`                  | 720           |
//! | `quantile`               | 1.0           |
//! | `gap_policy`             | reject        |
//! | `flip_interchange_sign`  | false         |

use std::collections::HashSet;
use std::path::Path;
use std::str::FromStr;

use freqbias_core::{BandSpec, BiasValue, CostModel, EstimatorConfig, Unit};

use crate::error::{CliError, Result};
use crate::telemetry::GapPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaUnit {
    MwPerHz,
    MwPer0p1Hz,
}

impl BetaUnit {
    pub fn unit(self) -> Unit {
        match self {
            BetaUnit::MwPerHz => Unit::MwPerHz,
            BetaUnit::MwPer0p1Hz => Unit::MwPer0p1Hz,
        }
    }
}

impl FromStr for BetaUnit {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mw_per_hz" => Ok(BetaUnit::MwPerHz),
            "mw_per_0p1hz" => Ok(BetaUnit::MwPer0p1Hz),
            other => Err(CliError::Config(format!(
                "beta unit {other:?}, expected mw_per_hz or mw_per_0p1hz"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub estimator: EstimatorConfig,
    pub fixed_beta: BiasValue,
    pub band: BandSpec,
    pub cost: CostModel,
    pub quantile: f64,
    pub gap_policy: GapPolicy,
    pub flip_interchange_sign: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            estimator: EstimatorConfig::default(),
            fixed_beta: BiasValue::mw_per_0p1hz(409.0),
            band: BandSpec::default(),
            cost: CostModel::default(),
            quantile: 1.0,
            gap_policy: GapPolicy::Reject,
            flip_interchange_sign: false,
        }
    }
}

/// Values that may override the file, typically from command-line flags.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub window_minutes: Option<usize>,
    pub fixed_beta: Option<f64>,
    pub beta_unit: Option<BetaUnit>,
    pub quantile: Option<f64>,
    pub gap_policy: Option<GapPolicy>,
    pub flip_interchange_sign: bool,
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("line {line}: cannot parse {key} = {value:?}")))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = HashSet::new();
        let mut beta = None;
        let mut unit = BetaUnit::MwPer0p1Hz;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {line}: expected key = value")))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(CliError::Config(format!("line {line}: duplicate key {key}")));
            }
            match key {
                "window_minutes" => cfg.estimator.window_minutes = parse_value(key, value, line)?,
                "stride_minutes" => cfg.estimator.stride_minutes = parse_value(key, value, line)?,
                "condition_threshold" => cfg.estimator.condition_threshold = parse_value(key, value, line)?,
                "min_regressor_variance" => {
                    cfg.estimator.min_regressor_variance = parse_value(key, value, line)?
                }
                "fixed_beta" => beta = Some(parse_value(key, value, line)?),
                "beta_unit" => unit = value.parse()?,
                "band_nominal_hz" => cfg.band.nominal_hz = parse_value(key, value, line)?,
                "band_half_width_hz" => cfg.band.half_width_hz = parse_value(key, value, line)?,
                "price_up" => cfg.cost.price_up = parse_value(key, value, line)?,
                "price_down" => cfg.cost.price_down = parse_value(key, value, line)?,
                "hours" => cfg.cost.hours = parse_value(key, value, line)?,
                "quantile" => cfg.quantile = parse_value(key, value, line)?,
                "gap_policy" => cfg.gap_policy = value.parse()?,
                "flip_interchange_sign" => cfg.flip_interchange_sign = parse_value(key, value, line)?,
                other => return Err(CliError::Config(format!("line {line}: unknown key {other}"))),
            }
        }
        if beta.is_some() || seen.contains("beta_unit") {
            let magnitude = beta.unwrap_or(cfg.fixed_beta.magnitude);
            cfg.fixed_beta = BiasValue::new(magnitude, unit.unit())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    /// Applies flag overrides; flags win over the file.
    pub fn apply(mut self, o: &Overrides) -> Result<Self> {
        if let Some(w) = o.window_minutes {
            self.estimator.window_minutes = w;
        }
        match (o.fixed_beta, o.beta_unit) {
            (Some(b), Some(u)) => self.fixed_beta = BiasValue::new(b, u.unit())?,
            (Some(b), None) => self.fixed_beta.magnitude = b,
            (None, Some(u)) => {
                self.fixed_beta = freqbias_core::convert_bias(self.fixed_beta, u.unit())?;
            }
            (None, None) => {}
        }
        if let Some(q) = o.quantile {
            self.quantile = q;
        }
        if let Some(g) = o.gap_policy {
            self.gap_policy = g;
        }
        self.flip_interchange_sign |= o.flip_interchange_sign;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.estimator
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        let beta = self.fixed_beta.to_mw_per_hz()?;
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(CliError::Config(format!("fixed beta {beta} MW/Hz must be positive")));
        }
        self.band.validate().map_err(|e| CliError::Config(e.to_string()))?;
        for (name, v) in [
            ("price_up", self.cost.price_up),
            ("price_down", self.cost.price_down),
            ("hours", self.cost.hours),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(CliError::Config(format!("{name} = {v} must be nonnegative")));
            }
        }
        if !(self.quantile > 0.5 && self.quantile <= 1.0) {
            return Err(CliError::Config(format!("quantile {} outside (0.5, 1]", self.quantile)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_parse() {
        let cfg = RunConfig::parse("# comment\n\nwindow_minutes = 30\nquantile=0.95\n").unwrap();
        assert_eq!(cfg.estimator.window_minutes, 30);
        assert_eq!(cfg.quantile, 0.95);
        assert_eq!(cfg.fixed_beta.to_mw_per_hz().unwrap(), 4090.0);
    }

    #[test]
    fn beta_units() {
        let cfg = RunConfig::parse("fixed_beta = 3500\nbeta_unit = mw_per_hz\n").unwrap();
        assert_eq!(cfg.fixed_beta, BiasValue::mw_per_hz(3500.0));
        let o = Overrides {
            beta_unit: Some(BetaUnit::MwPer0p1Hz),
            ..Overrides::default()
        };
        let cfg = cfg.apply(&o).unwrap();
        assert_eq!(cfg.fixed_beta, BiasValue::mw_per_0p1hz(350.0));
    }

    #[test]
    fn flags_win() {
        let cfg = RunConfig::parse("window_minutes = 30\ngap_policy = drop_hour\n").unwrap();
        let o = Overrides {
            window_minutes: Some(90),
            gap_policy: Some(GapPolicy::Reject),
            ..Overrides::default()
        };
        let cfg = cfg.apply(&o).unwrap();
        assert_eq!(cfg.estimator.window_minutes, 90);
        assert_eq!(cfg.gap_policy, GapPolicy::Reject);
    }

    #[test]
    fn rejects_bad_files() {
        for text in [
            "window_minutes 30",
            "window_minutes = thirty",
            "colour = blue",
            "quantile = 0.4",
            "window_minutes = 1",
            "quantile = 1\nquantile = 1",
            "fixed_beta = -4",
            "beta_unit = mw",
        ] {
            assert!(matches!(RunConfig::parse(text), Err(CliError::Config(_))), "{text}");
        }
    }
}
