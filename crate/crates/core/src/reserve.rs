//! Regulation reserve envelopes, reserve cost and frequency band
//! compliance.

use std::fmt;

use chrono::Datelike;

use crate::error::{Error, Result};
use crate::timeseries::{TimeSeries, Unit, MINUTE_S};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeBasis {
    DpL,
    Ace,
}

impl fmt::Display for EnvelopeBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnvelopeBasis::DpL => "dp_l",
            EnvelopeBasis::Ace => "ace",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReserveEnvelope {
    pub hour_index: usize,
    pub reg_up_mw: f64,
    pub reg_down_mw: f64,
    pub basis: EnvelopeBasis,
    pub quantile: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    /// $/MW·h
    pub price_up: f64,
    /// $/MW·h
    pub price_down: f64,
    pub hours: f64,
}

impl Default for CostModel {
    /// $10 up, $10 down, 720 hours (a 30-day month).
    fn default() -> Self {
        Self {
            price_up: 10.0,
            price_down: 10.0,
            hours: 720.0,
        }
    }
}

/// Whole cents, the unit money is reported in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Money {
    pub cents: i64,
}

impl Money {
    /// Rounds a dollar amount to the nearest cent, ties to even.
    pub fn from_dollars(dollars: f64) -> Self {
        let cents = (dollars * 100.0).round_ties_even();
        Self { cents: cents as i64 }
    }

    pub fn dollars(&self) -> f64 {
        self.cents as f64 / 100.0
    }
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.cents < 0 { "-" } else { "" };
        let abs = self.cents.unsigned_abs();
        write!(f, "{sign}${}.{:02}", abs / 100, abs % 100)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSpec {
    pub nominal_hz: f64,
    pub half_width_hz: f64,
}

impl Default for BandSpec {
    fn default() -> Self {
        Self {
            nominal_hz: 60.0,
            half_width_hz: 0.036,
        }
    }
}

impl BandSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.half_width_hz > 0.0) || !self.half_width_hz.is_finite() {
            return Err(Error::NegativeInput(format!(
                "band half width {} must be positive",
                self.half_width_hz
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tightening {
    /// `(up + down)` with interchange minus without, per hour.
    pub per_hour_mw: Vec<f64>,
    pub average_mw: f64,
}

/// Linear-interpolation sample quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn check_quantile(q: f64) -> Result<()> {
    if !(q > 0.5 && q <= 1.0) {
        return Err(Error::BadQuantile(q));
    }
    Ok(())
}

fn check_hourly(series: &TimeSeries) -> Result<()> {
    series.require_unit(Unit::Mw)?;
    if series.period_s() != MINUTE_S {
        return Err(Error::PeriodMismatch {
            expected: MINUTE_S,
            found: series.period_s(),
        });
    }
    if !series.len().is_multiple_of(60) {
        return Err(Error::PartialHour(series.len()));
    }
    Ok(())
}

/// Per-hour regulation bounds. Up is the `q` quantile of the hour's
/// samples, down the `q` quantile of their negation, each floored at zero.
/// With `q = 1` these are the hourly maximum and minimum magnitude.
pub fn reserve_envelope(series: &TimeSeries, q: f64, basis: EnvelopeBasis) -> Result<Vec<ReserveEnvelope>> {
    check_quantile(q)?;
    check_hourly(series)?;
    Ok(series
        .values()
        .chunks_exact(60)
        .enumerate()
        .map(|(h, hour)| {
            let mut up = hour.to_vec();
            up.sort_by(f64::total_cmp);
            let mut down: Vec<f64> = hour.iter().map(|v| -v).collect();
            down.sort_by(f64::total_cmp);
            ReserveEnvelope {
                hour_index: h,
                reg_up_mw: quantile_sorted(&up, q).max(0.0),
                reg_down_mw: quantile_sorted(&down, q).max(0.0),
                basis,
                quantile: q,
            }
        })
        .collect())
}

pub fn envelope_tightening(
    with_interchange: &TimeSeries,
    without_interchange: &TimeSeries,
    q: f64,
) -> Result<Tightening> {
    with_interchange.check_aligned(without_interchange)?;
    let a = reserve_envelope(with_interchange, q, EnvelopeBasis::Ace)?;
    let b = reserve_envelope(without_interchange, q, EnvelopeBasis::Ace)?;
    let per_hour_mw: Vec<f64> = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x.reg_up_mw + x.reg_down_mw) - (y.reg_up_mw + y.reg_down_mw))
        .collect();
    let average_mw = per_hour_mw.iter().sum::<f64>() / per_hour_mw.len() as f64;
    Ok(Tightening {
        per_hour_mw,
        average_mw,
    })
}

/// `avg_mw · (price_up + price_down) · hours`.
pub fn cost_savings(avg_mw: f64, model: &CostModel) -> Result<Money> {
    for (name, v) in [
        ("average reduction", avg_mw),
        ("price up", model.price_up),
        ("price down", model.price_down),
        ("hours", model.hours),
    ] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::NegativeInput(format!("{name} = {v}")));
        }
    }
    Ok(Money::from_dollars(
        avg_mw * (model.price_up + model.price_down) * model.hours,
    ))
}

/// Fraction of samples with `|f − f_ref| ≤ half_width_hz`.
pub fn band_compliance(f: &TimeSeries, f_ref: &TimeSeries, band: &BandSpec) -> Result<f64> {
    band.validate()?;
    f.require_unit(Unit::Hz)?;
    f_ref.require_unit(Unit::Hz)?;
    f.check_aligned(f_ref)?;
    let inside = f
        .values()
        .iter()
        .zip(f_ref.values())
        .filter(|(a, b)| (*a - *b).abs() <= band.half_width_hz)
        .count();
    Ok(inside as f64 / f.len() as f64)
}

/// Monthly average of hourly envelopes, keyed `(year, month)` by the UTC
/// start of each hour.
#[derive(Debug, Clone, PartialEq)]
pub struct MonthlyEnvelope {
    pub year: i32,
    pub month: u32,
    pub hours: usize,
    pub mean_reg_up_mw: f64,
    pub mean_reg_down_mw: f64,
}

pub fn monthly_envelopes(series: &TimeSeries, envelopes: &[ReserveEnvelope]) -> Result<Vec<MonthlyEnvelope>> {
    let mut out: Vec<MonthlyEnvelope> = Vec::new();
    for e in envelopes {
        let minute = e.hour_index * 60;
        if minute >= series.len() {
            return Err(Error::OutOfBounds {
                start: minute,
                length: 60,
                series_len: series.len(),
            });
        }
        let t = series.time_at(minute);
        match out.last_mut() {
            Some(m) if m.year == t.year() && m.month == t.month() => {
                m.hours += 1;
                m.mean_reg_up_mw += e.reg_up_mw;
                m.mean_reg_down_mw += e.reg_down_mw;
            }
            _ => out.push(MonthlyEnvelope {
                year: t.year(),
                month: t.month(),
                hours: 1,
                mean_reg_up_mw: e.reg_up_mw,
                mean_reg_down_mw: e.reg_down_mw,
            }),
        }
    }
    for m in &mut out {
        m.mean_reg_up_mw /= m.hours as f64;
        m.mean_reg_down_mw /= m.hours as f64;
    }
    Ok(out)
}
