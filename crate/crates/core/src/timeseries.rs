//! Uniformly sampled telemetry series, windows and bias units.
//!
//! Every other module consumes [`TimeSeries`]. A series is immutable once
//! built: values are finite, the period is positive and the physical unit is
//! fixed for the whole series. Frequencies are carried in Hz end to end.

use std::fmt;

use chrono::{DateTime, Duration, Utc};

use crate::error::{Error, Result};

/// Minutes in a UTC day. No daylight-saving days are modelled.
pub const MINUTES_PER_DAY: usize = 1440;
pub const MINUTE_S: i64 = 60;
pub const HOUR_S: i64 = 3600;

/// Ratio between MW/Hz and MW/0.1Hz.
pub const BIAS_UNIT_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Unit {
    Mw,
    Hz,
    MwPerHz,
    MwPer0p1Hz,
    Mwh,
    Dimensionless,
}

impl Unit {
    pub fn is_bias(self) -> bool {
        matches!(self, Unit::MwPerHz | Unit::MwPer0p1Hz)
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Unit::Mw => "MW",
            Unit::Hz => "Hz",
            Unit::MwPerHz => "MW/Hz",
            Unit::MwPer0p1Hz => "MW/0.1Hz",
            Unit::Mwh => "MWh",
            Unit::Dimensionless => "1",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    start: DateTime<Utc>,
    period_s: i64,
    values: Vec<f64>,
    unit: Unit,
}

impl TimeSeries {
    /// Builds a series, rejecting empty input, non-positive periods and
    /// non-finite samples.
    pub fn new(start: DateTime<Utc>, period_s: i64, values: Vec<f64>, unit: Unit) -> Result<Self> {
        if period_s <= 0 {
            return Err(Error::NonPositivePeriod(period_s));
        }
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(i));
        }
        Ok(Self {
            start,
            period_s,
            values,
            unit,
        })
    }

    /// Minute-resolution series.
    pub fn minutes(start: DateTime<Utc>, values: Vec<f64>, unit: Unit) -> Result<Self> {
        Self::new(start, MINUTE_S, values, unit)
    }

    pub fn start(&self) -> DateTime<Utc> {
        self.start
    }

    pub fn period_s(&self) -> i64 {
        self.period_s
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time_at(&self, index: usize) -> DateTime<Utc> {
        self.start + Duration::seconds(self.period_s * index as i64)
    }

    /// Same timing as `self`, new values and unit.
    pub fn with_values(&self, values: Vec<f64>, unit: Unit) -> Result<Self> {
        if values.len() != self.len() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} values, got {}",
                self.len(),
                values.len()
            )));
        }
        Self::new(self.start, self.period_s, values, unit)
    }

    /// Checks that two series share start, period and length.
    pub fn check_aligned(&self, other: &TimeSeries) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::ShapeMismatch(format!(
                "lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        if self.period_s != other.period_s {
            return Err(Error::ShapeMismatch(format!(
                "periods {} s and {} s",
                self.period_s, other.period_s
            )));
        }
        if self.start != other.start {
            return Err(Error::ShapeMismatch(format!(
                "start times {} and {}",
                self.start, other.start
            )));
        }
        Ok(())
    }

    pub fn require_unit(&self, unit: Unit) -> Result<()> {
        if self.unit != unit {
            return Err(Error::UnitMismatch {
                expected: unit,
                found: self.unit,
            });
        }
        Ok(())
    }

    /// Elementwise `self - other`.
    pub fn subtract(&self, other: &TimeSeries) -> Result<TimeSeries> {
        self.check_aligned(other)?;
        other.require_unit(self.unit)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        self.with_values(values, self.unit)
    }

    /// Hourly energy from a minute MW series: each output sample is the mean
    /// of 60 consecutive minutes, i.e. MWh over that hour.
    pub fn hourly_sum_mwh(&self) -> Result<TimeSeries> {
        if self.period_s != MINUTE_S {
            return Err(Error::PeriodMismatch {
                expected: MINUTE_S,
                found: self.period_s,
            });
        }
        self.require_unit(Unit::Mw)?;
        if !self.len().is_multiple_of(60) {
            return Err(Error::PartialHour(self.len()));
        }
        let values = self
            .values
            .chunks_exact(60)
            .map(|hour| hour.iter().sum::<f64>() / 60.0)
            .collect();
        TimeSeries::new(self.start, HOUR_S, values, Unit::Mwh)
    }

    pub fn slice(&self, w: Window) -> Result<TimeSeries> {
        w.check(self.len())?;
        TimeSeries::new(
            self.time_at(w.start),
            self.period_s,
            self.values[w.range()].to_vec(),
            self.unit,
        )
    }
}

/// Free-function form of [`TimeSeries::new`].
pub fn make_series(
    start: DateTime<Utc>,
    period_s: i64,
    values: Vec<f64>,
    unit: Unit,
) -> Result<TimeSeries> {
    TimeSeries::new(start, period_s, values, unit)
}

pub fn subtract(a: &TimeSeries, b: &TimeSeries) -> Result<TimeSeries> {
    a.subtract(b)
}

pub fn hourly_sum_mwh(s: &TimeSeries) -> Result<TimeSeries> {
    s.hourly_sum_mwh()
}

pub fn slice(s: &TimeSeries, w: Window) -> Result<TimeSeries> {
    s.slice(w)
}

/// Contiguous index range `[start, start + length)` into a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub start: usize,
    pub length: usize,
}

impl Window {
    pub fn new(start: usize, length: usize) -> Self {
        Self { start, length }
    }

    /// Window of `length` samples ending at `end` inclusive.
    pub fn trailing(end: usize, length: usize) -> Self {
        Self {
            start: end + 1 - length,
            length,
        }
    }

    pub fn end(&self) -> usize {
        self.start + self.length
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.end()
    }

    pub fn check(&self, series_len: usize) -> Result<()> {
        if self.length == 0 || self.end() > series_len {
            return Err(Error::OutOfBounds {
                start: self.start,
                length: self.length,
                series_len,
            });
        }
        Ok(())
    }
}

/// Frequency bias magnitude tagged with MW/Hz or MW/0.1Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasValue {
    pub magnitude: f64,
    pub unit: Unit,
}

impl BiasValue {
    pub fn new(magnitude: f64, unit: Unit) -> Result<Self> {
        if !unit.is_bias() {
            return Err(Error::UnsupportedUnit(unit));
        }
        Ok(Self { magnitude, unit })
    }

    pub fn mw_per_hz(magnitude: f64) -> Self {
        Self {
            magnitude,
            unit: Unit::MwPerHz,
        }
    }

    pub fn mw_per_0p1hz(magnitude: f64) -> Self {
        Self {
            magnitude,
            unit: Unit::MwPer0p1Hz,
        }
    }

    pub fn to_mw_per_hz(self) -> Result<f64> {
        convert_bias(self, Unit::MwPerHz).map(|b| b.magnitude)
    }
}

pub fn convert_bias(v: BiasValue, target: Unit) -> Result<BiasValue> {
    if !v.unit.is_bias() {
        return Err(Error::UnsupportedUnit(v.unit));
    }
    if !target.is_bias() {
        return Err(Error::UnsupportedUnit(target));
    }
    let magnitude = match (v.unit, target) {
        (a, b) if a == b => v.magnitude,
        (Unit::MwPer0p1Hz, Unit::MwPerHz) => v.magnitude * BIAS_UNIT_RATIO,
        _ => v.magnitude / BIAS_UNIT_RATIO,
    };
    Ok(BiasValue {
        magnitude,
        unit: target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;
    use proptest::prelude::*;

    fn t0() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2017, 10, 14, 0, 0, 0).unwrap()
    }

    #[test]
    fn make_series_echoes_inputs() {
        let s = make_series(t0(), 60, vec![1.0, 2.0], Unit::Mw).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.period_s(), 60);
        assert_eq!(s.values(), &[1.0, 2.0]);
        assert_eq!(s.unit(), Unit::Mw);
    }

    #[test]
    fn make_series_guards() {
        assert_eq!(
            make_series(t0(), 60, vec![f64::NAN], Unit::Hz),
            Err(Error::NonFiniteValue(0))
        );
        assert_eq!(
            make_series(t0(), 60, vec![1.0, f64::INFINITY], Unit::Hz),
            Err(Error::NonFiniteValue(1))
        );
        assert_eq!(
            make_series(t0(), 60, vec![], Unit::Hz),
            Err(Error::EmptySeries)
        );
        assert_eq!(
            make_series(t0(), 0, vec![1.0], Unit::Hz),
            Err(Error::NonPositivePeriod(0))
        );
    }

    #[test]
    fn one_day_of_minutes() {
        let s = make_series(t0(), 60, vec![60.0; 1440], Unit::Hz).unwrap();
        assert_eq!(s.len(), MINUTES_PER_DAY);
        let span = s.time_at(s.len()) - s.start();
        assert_eq!(span.num_hours(), 24);
    }

    #[test]
    fn subtract_elementwise() {
        let a = TimeSeries::minutes(t0(), vec![60.01, 59.99], Unit::Hz).unwrap();
        let b = TimeSeries::minutes(t0(), vec![60.0, 60.0], Unit::Hz).unwrap();
        let d = a.subtract(&b).unwrap();
        assert!((d.values()[0] - 0.01).abs() < 1e-12);
        assert!((d.values()[1] + 0.01).abs() < 1e-12);
        assert!(a.subtract(&a).unwrap().values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn subtract_matches_loop_oracle() {
        let nai: Vec<f64> = (0..120).map(|k| 500.0 + (k as f64 * 0.37).sin() * 40.0).collect();
        let nsi: Vec<f64> = (0..120).map(|k| if k < 60 { 500.0 } else { 480.0 }).collect();
        let a = TimeSeries::minutes(t0(), nai.clone(), Unit::Mw).unwrap();
        let b = TimeSeries::minutes(t0(), nsi.clone(), Unit::Mw).unwrap();
        let d = a.subtract(&b).unwrap();
        for k in 0..120 {
            assert_eq!(d.values()[k], nai[k] - nsi[k]);
        }
    }

    #[test]
    fn subtract_rejects_mismatch() {
        let a = TimeSeries::minutes(t0(), vec![1.0, 2.0], Unit::Mw).unwrap();
        let b = TimeSeries::minutes(t0(), vec![1.0], Unit::Mw).unwrap();
        assert!(matches!(a.subtract(&b), Err(Error::ShapeMismatch(_))));
        let c = TimeSeries::minutes(t0(), vec![1.0, 2.0], Unit::Hz).unwrap();
        assert!(matches!(a.subtract(&c), Err(Error::UnitMismatch { .. })));
        let d = TimeSeries::minutes(t0() + Duration::minutes(1), vec![1.0, 2.0], Unit::Mw).unwrap();
        assert!(matches!(a.subtract(&d), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn hourly_sums() {
        let c = TimeSeries::minutes(t0(), vec![60.0; 60], Unit::Mw).unwrap();
        let h = c.hourly_sum_mwh().unwrap();
        assert_eq!(h.values(), &[60.0]);
        assert_eq!(h.unit(), Unit::Mwh);
        assert_eq!(h.period_s(), HOUR_S);

        let z = TimeSeries::minutes(t0(), vec![0.0; 60], Unit::Mw).unwrap();
        assert_eq!(z.hourly_sum_mwh().unwrap().values(), &[0.0]);

        let ramp = TimeSeries::minutes(t0(), (0..60).map(f64::from).collect(), Unit::Mw).unwrap();
        assert_eq!(ramp.hourly_sum_mwh().unwrap().values(), &[29.5]);
    }

    #[test]
    fn hourly_sum_guards() {
        let partial = TimeSeries::minutes(t0(), vec![1.0; 90], Unit::Mw).unwrap();
        assert_eq!(partial.hourly_sum_mwh(), Err(Error::PartialHour(90)));
        let hourly = TimeSeries::new(t0(), 3600, vec![1.0; 60], Unit::Mw).unwrap();
        assert!(matches!(
            hourly.hourly_sum_mwh(),
            Err(Error::PeriodMismatch { .. })
        ));
        let hz = TimeSeries::minutes(t0(), vec![1.0; 60], Unit::Hz).unwrap();
        assert!(matches!(hz.hourly_sum_mwh(), Err(Error::UnitMismatch { .. })));
    }

    #[test]
    fn slicing() {
        let s = TimeSeries::minutes(t0(), (0..10).map(f64::from).collect(), Unit::Mw).unwrap();
        assert_eq!(s.slice(Window::new(0, 10)).unwrap(), s);
        assert!(matches!(
            s.slice(Window::new(5, 10)),
            Err(Error::OutOfBounds { .. })
        ));
        let tail = s.slice(Window::new(4, 3)).unwrap();
        assert_eq!(tail.values(), &[4.0, 5.0, 6.0]);
        assert_eq!(tail.start(), t0() + Duration::minutes(4));

        let day = TimeSeries::minutes(t0(), vec![60.0; 1440], Unit::Hz).unwrap();
        let hour = day.slice(Window::new(0, 60)).unwrap();
        assert_eq!(hour.len(), 60);
        assert_eq!(hour.start(), day.start());
    }

    #[test]
    fn bias_conversion() {
        let b = convert_bias(BiasValue::mw_per_0p1hz(409.0), Unit::MwPerHz).unwrap();
        assert_eq!(b.magnitude, 4090.0);
        assert_eq!(b.unit, Unit::MwPerHz);
        let same = convert_bias(BiasValue::mw_per_hz(4090.0), Unit::MwPerHz).unwrap();
        assert_eq!(same.magnitude, 4090.0);
        let down = convert_bias(BiasValue::mw_per_hz(50.0), Unit::MwPer0p1Hz).unwrap();
        assert_eq!(down.magnitude, 5.0);
        assert_eq!(
            convert_bias(BiasValue::mw_per_hz(1.0), Unit::Hz),
            Err(Error::UnsupportedUnit(Unit::Hz))
        );
        assert_eq!(
            BiasValue::new(1.0, Unit::Mw),
            Err(Error::UnsupportedUnit(Unit::Mw))
        );
    }

    proptest! {
        #[test]
        fn subtract_then_add_restores(
            pairs in prop::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 1..200)
        ) {
            let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let sa = TimeSeries::minutes(t0(), a.clone(), Unit::Mw).unwrap();
            let sb = TimeSeries::minutes(t0(), b.clone(), Unit::Mw).unwrap();
            let d = sa.subtract(&sb).unwrap();
            for k in 0..a.len() {
                let back = d.values()[k] + b[k];
                prop_assert!((back - a[k]).abs() <= 1e-12 * a[k].abs().max(b[k].abs()).max(1.0));
            }
        }

        #[test]
        fn constant_hour_integrates_exactly(c in -1e5f64..1e5, hours in 1usize..5) {
            let s = TimeSeries::minutes(t0(), vec![c; 60 * hours], Unit::Mw).unwrap();
            let h = s.hourly_sum_mwh().unwrap();
            prop_assert_eq!(h.len(), hours);
            for v in h.values() {
                prop_assert!((v - c).abs() <= 1e-12 * c.abs().max(1.0));
            }
        }

        #[test]
        fn bias_conversion_involution(m in -1e6f64..1e6, tenth in any::<bool>()) {
            let (u1, u2) = if tenth { (Unit::MwPer0p1Hz, Unit::MwPerHz) } else { (Unit::MwPerHz, Unit::MwPer0p1Hz) };
            let v = BiasValue::new(m, u1).unwrap();
            let back = convert_bias(convert_bias(v, u2).unwrap(), u1).unwrap();
            prop_assert!((back.magnitude - m).abs() <= 1e-15 * m.abs());
            prop_assert_eq!(back.unit, u1);
        }

        #[test]
        fn full_window_slice_is_identity(vals in prop::collection::vec(-1e3f64..1e3, 1..100)) {
            let s = TimeSeries::minutes(t0(), vals.clone(), Unit::Mw).unwrap();
            prop_assert_eq!(s.slice(Window::new(0, vals.len())).unwrap(), s);
        }
    }
}
