//! Area control error accounting.
//!
//! `ACE = ACE_f + ΔF` where `ΔF = NAI − NSI` is the interchange part and
//! `ACE_f = −β·Δf` is the frequency part. Bias magnitudes are positive and
//! handled in MW/Hz internally, so under-frequency yields positive ACE_f.

use crate::error::{Error, Result};
use crate::timeseries::{convert_bias, BiasValue, TimeSeries, Unit, HOUR_S, MINUTE_S};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AceRecord {
    pub minute_index: usize,
    pub ace_f: f64,
    pub delta_f_interchange: f64,
    pub ace_total: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IeeRecord {
    pub hour_index: usize,
    pub iee_mwh: f64,
    /// Counterfactual IEE with the frequency part recomputed from the
    /// estimated bias. `None` for plain accounting.
    pub iee_optimal_mwh: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiasOrigin {
    Fixed,
    Estimated,
}

/// Bias applied per minute: one fixed value or a series in MW/Hz or
/// MW/0.1Hz.
#[derive(Debug, Clone, Copy)]
pub enum BiasInput<'a> {
    Fixed(BiasValue),
    Series(&'a TimeSeries),
}

impl BiasInput<'_> {
    pub fn origin(&self) -> BiasOrigin {
        match self {
            BiasInput::Fixed(_) => BiasOrigin::Fixed,
            BiasInput::Series(_) => BiasOrigin::Estimated,
        }
    }

    /// Per-minute values in MW/Hz aligned to `like`.
    pub fn mw_per_hz(&self, like: &TimeSeries) -> Result<Vec<f64>> {
        match self {
            BiasInput::Fixed(b) => Ok(vec![b.to_mw_per_hz()?; like.len()]),
            BiasInput::Series(s) => {
                like.check_aligned(s)?;
                if !s.unit().is_bias() {
                    return Err(Error::UnitMismatch {
                        expected: Unit::MwPerHz,
                        found: s.unit(),
                    });
                }
                let factor = convert_bias(BiasValue::new(1.0, s.unit())?, Unit::MwPerHz)?.magnitude;
                Ok(s.values().iter().map(|v| v * factor).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadDeviationSeries {
    pub dp_l: TimeSeries,
    pub beta_used: BiasOrigin,
}

/// Minute series from an hourly one by holding each hour's value for its
/// 60 minutes, truncated to `minutes` samples.
pub fn expand_hourly(hourly: &TimeSeries, minutes: usize) -> Result<TimeSeries> {
    if hourly.period_s() != HOUR_S {
        return Err(Error::PeriodMismatch {
            expected: HOUR_S,
            found: hourly.period_s(),
        });
    }
    if minutes.div_ceil(60) != hourly.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} hourly samples cannot cover {minutes} minutes",
            hourly.len()
        )));
    }
    let values = (0..minutes).map(|k| hourly.values()[k / 60]).collect();
    TimeSeries::new(hourly.start(), MINUTE_S, values, hourly.unit())
}

/// `NAI − NSI`. An hourly NSI is expanded against minute NAI first.
pub fn interchange_deviation(nai: &TimeSeries, nsi: &TimeSeries) -> Result<TimeSeries> {
    nai.require_unit(Unit::Mw)?;
    nsi.require_unit(Unit::Mw)?;
    if nsi.period_s() == HOUR_S && nai.period_s() == MINUTE_S {
        let expanded = expand_hourly(nsi, nai.len())?;
        return nai.subtract(&expanded);
    }
    nai.subtract(nsi)
}

/// `−β·Δf` in MW.
pub fn ace_f_from_bias(beta: BiasInput<'_>, delta_f: &TimeSeries) -> Result<TimeSeries> {
    delta_f.require_unit(Unit::Hz)?;
    let b = beta.mw_per_hz(delta_f)?;
    let values = b.iter().zip(delta_f.values()).map(|(b, d)| -b * d).collect();
    delta_f.with_values(values, Unit::Mw)
}

pub fn compose_ace(ace_f: &TimeSeries, delta_interchange: &TimeSeries) -> Result<Vec<AceRecord>> {
    ace_f.require_unit(Unit::Mw)?;
    delta_interchange.require_unit(Unit::Mw)?;
    ace_f.check_aligned(delta_interchange)?;
    Ok(ace_f
        .values()
        .iter()
        .zip(delta_interchange.values())
        .enumerate()
        .map(|(k, (&a, &d))| AceRecord {
            minute_index: k,
            ace_f: a,
            delta_f_interchange: d,
            ace_total: a + d,
        })
        .collect())
}

/// `ΔP_L = −β·Δf`. A bias quoted in MW/0.1Hz is converted first, which is
/// where the factor of ten enters.
pub fn estimate_load_deviation(beta: BiasInput<'_>, delta_f: &TimeSeries) -> Result<LoadDeviationSeries> {
    Ok(LoadDeviationSeries {
        dp_l: ace_f_from_bias(beta, delta_f)?,
        beta_used: beta.origin(),
    })
}

fn hourly_records(dev: &TimeSeries, optimal: Option<&TimeSeries>) -> Result<Vec<IeeRecord>> {
    let iee = dev.hourly_sum_mwh()?;
    let opt = optimal.map(TimeSeries::hourly_sum_mwh).transpose()?;
    Ok(iee
        .values()
        .iter()
        .enumerate()
        .map(|(h, &v)| IeeRecord {
            hour_index: h,
            iee_mwh: v,
            iee_optimal_mwh: opt.as_ref().map(|o| o.values()[h]),
        })
        .collect())
}

/// Hourly inadvertent energy, MWh.
pub fn iee_hourly(nai: &TimeSeries, nsi: &TimeSeries) -> Result<Vec<IeeRecord>> {
    hourly_records(&interchange_deviation(nai, nsi)?, None)
}

/// Hourly IEE as recorded next to the IEE obtained when the frequency part
/// is recomputed with `estimated` instead of `fixed`.
///
/// The recorded ACE is held fixed, so whatever the frequency part no longer
/// explains is attributed to interchange:
/// `ΔF_opt = ΔF + ACE_f(fixed) − ACE_f(estimated)`.
pub fn iee_compare(
    nai: &TimeSeries,
    nsi: &TimeSeries,
    f: &TimeSeries,
    f_ref: &TimeSeries,
    fixed: BiasValue,
    estimated: BiasInput<'_>,
) -> Result<Vec<IeeRecord>> {
    let dev = interchange_deviation(nai, nsi)?;
    iee_compare_deviation(&dev, f, f_ref, fixed, estimated)
}

/// [`iee_compare`] from an already formed `ΔF` series.
pub fn iee_compare_deviation(
    delta_interchange: &TimeSeries,
    f: &TimeSeries,
    f_ref: &TimeSeries,
    fixed: BiasValue,
    estimated: BiasInput<'_>,
) -> Result<Vec<IeeRecord>> {
    delta_interchange.require_unit(Unit::Mw)?;
    let delta_f = f.subtract(f_ref)?;
    delta_interchange.check_aligned(&delta_f)?;
    let rec = ace_f_from_bias(BiasInput::Fixed(fixed), &delta_f)?;
    let est = ace_f_from_bias(estimated, &delta_f)?;
    let values = delta_interchange
        .values()
        .iter()
        .zip(rec.values().iter().zip(est.values()))
        .map(|(d, (r, e))| d + (r - e))
        .collect();
    let optimal = delta_interchange.with_values(values, Unit::Mw)?;
    hourly_records(delta_interchange, Some(&optimal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{TimeZone, Utc};
    use proptest::prelude::*;

    fn start() -> chrono::DateTime<Utc> {
        Utc.with_ymd_and_hms(2017, 10, 24, 0, 0, 0).unwrap()
    }

    fn mw(v: Vec<f64>) -> TimeSeries {
        TimeSeries::minutes(start(), v, Unit::Mw).unwrap()
    }

    fn hz(v: Vec<f64>) -> TimeSeries {
        TimeSeries::minutes(start(), v, Unit::Hz).unwrap()
    }

    #[test]
    fn interchange_basics() {
        let nai = mw(vec![500.0, 510.0, 490.0]);
        let same = interchange_deviation(&nai, &nai).unwrap();
        assert!(same.values().iter().all(|v| *v == 0.0));
        let plus = mw(nai.values().iter().map(|v| v + 100.0).collect());
        let d = interchange_deviation(&plus, &nai).unwrap();
        assert!(d.values().iter().all(|v| *v == 100.0));
    }

    #[test]
    fn hourly_schedule_expanded() {
        let nai = mw(vec![510.0; 60]);
        let nsi = TimeSeries::new(start(), HOUR_S, vec![500.0], Unit::Mw).unwrap();
        let d = interchange_deviation(&nai, &nsi).unwrap();
        assert_eq!(d.len(), 60);
        assert!(d.values().iter().all(|v| *v == 10.0));

        let two = TimeSeries::new(start(), HOUR_S, vec![500.0, 400.0], Unit::Mw).unwrap();
        assert!(matches!(
            interchange_deviation(&nai, &two),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn frequency_part() {
        let zero = ace_f_from_bias(BiasInput::Fixed(BiasValue::mw_per_hz(4090.0)), &hz(vec![0.0; 5])).unwrap();
        assert!(zero.values().iter().all(|v| *v == 0.0));

        let sag = hz(vec![-0.036]);
        let a = ace_f_from_bias(BiasInput::Fixed(BiasValue::mw_per_hz(4090.0)), &sag).unwrap();
        assert!((a.values()[0] - 147.24).abs() < 1e-9);
        let b = ace_f_from_bias(BiasInput::Fixed(BiasValue::mw_per_0p1hz(409.0)), &sag).unwrap();
        assert!((b.values()[0] - 147.24).abs() < 1e-9);
        assert!((a.values()[0] - b.values()[0]).abs() <= 1e-12 * a.values()[0].abs());

        assert!(matches!(
            ace_f_from_bias(BiasInput::Fixed(BiasValue::mw_per_hz(1.0)), &mw(vec![1.0])),
            Err(Error::UnitMismatch { .. })
        ));
    }

    #[test]
    fn per_minute_bias_series() {
        let df = hz(vec![-0.01, 0.02]);
        let beta = TimeSeries::minutes(start(), vec![400.0, 300.0], Unit::MwPer0p1Hz).unwrap();
        let a = ace_f_from_bias(BiasInput::Series(&beta), &df).unwrap();
        assert!((a.values()[0] - 40.0).abs() < 1e-12);
        assert!((a.values()[1] + 60.0).abs() < 1e-12);
        let wrong = TimeSeries::minutes(start(), vec![1.0, 1.0], Unit::Mw).unwrap();
        assert!(ace_f_from_bias(BiasInput::Series(&wrong), &df).is_err());
    }

    #[test]
    fn composition() {
        let z = compose_ace(&mw(vec![0.0; 3]), &mw(vec![0.0; 3])).unwrap();
        assert!(z.iter().all(|r| r.ace_total == 0.0));
        let x = vec![1.5, -2.25, 7.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        let c = compose_ace(&mw(x), &mw(neg)).unwrap();
        assert!(c.iter().all(|r| r.ace_total == 0.0 && r.ace_f != 0.0));
        assert_eq!(c[2].minute_index, 2);
        assert!(compose_ace(&mw(vec![0.0; 3]), &mw(vec![0.0; 2])).is_err());
    }

    #[test]
    fn load_deviation_arithmetic() {
        let d = estimate_load_deviation(BiasInput::Fixed(BiasValue::mw_per_hz(4090.0)), &hz(vec![0.01, 0.0])).unwrap();
        assert!((d.dp_l.values()[0] + 40.9).abs() < 1e-12);
        assert_eq!(d.dp_l.values()[1], 0.0);
        assert_eq!(d.beta_used, BiasOrigin::Fixed);
    }

    #[test]
    fn iee_cases() {
        let nai = mw(vec![300.0; 120]);
        let zero = iee_hourly(&nai, &nai).unwrap();
        assert_eq!(zero.len(), 2);
        assert!(zero.iter().all(|r| r.iee_mwh == 0.0 && r.iee_optimal_mwh.is_none()));

        let plus = mw(vec![360.0; 60]);
        let base = mw(vec![300.0; 60]);
        assert_eq!(iee_hourly(&plus, &base).unwrap()[0].iee_mwh, 60.0);

        // sawtooth 0..=24 repeated, mean 12
        let saw = mw((0..60).map(|k| (k % 25) as f64 * 24.0 / 24.0).collect());
        let mean: f64 = saw.values().iter().sum::<f64>() / 60.0;
        let r = iee_hourly(&saw, &mw(vec![0.0; 60])).unwrap();
        assert!((r[0].iee_mwh - mean).abs() < 1e-12);

        let tri = mw((0..60).map(|k| if k < 30 { 0.8 * k as f64 } else { 0.8 * (60 - k) as f64 }).collect());
        let r = iee_hourly(&tri, &mw(vec![0.0; 60])).unwrap();
        assert!((r[0].iee_mwh - 12.0).abs() < 1e-12);

        assert_eq!(
            iee_hourly(&mw(vec![0.0; 90]), &mw(vec![0.0; 90])),
            Err(Error::PartialHour(90))
        );
    }

    #[test]
    fn iee_compare_degenerate_and_flat() {
        let n = 120;
        let nai = mw((0..n).map(|k| 5.0 * (k as f64 * 0.3).sin()).collect());
        let nsi = mw(vec![0.0; n]);
        let f = hz((0..n).map(|k| 60.0 + 0.01 * (k as f64 * 0.2).cos()).collect());
        let f_ref = hz(vec![60.0; n]);
        let fixed = BiasValue::mw_per_hz(4090.0);
        let same = TimeSeries::minutes(start(), vec![409.0; n], Unit::MwPer0p1Hz).unwrap();
        let r = iee_compare(&nai, &nsi, &f, &f_ref, fixed, BiasInput::Series(&same)).unwrap();
        for rec in &r {
            assert!((rec.iee_mwh - rec.iee_optimal_mwh.unwrap()).abs() < 1e-9);
        }

        let other = TimeSeries::minutes(start(), vec![3500.0; n], Unit::MwPerHz).unwrap();
        let flat = iee_compare(&nai, &nsi, &f_ref, &f_ref, fixed, BiasInput::Series(&other)).unwrap();
        let plain = iee_hourly(&nai, &nsi).unwrap();
        for (a, b) in flat.iter().zip(&plain) {
            assert_eq!(a.iee_mwh, b.iee_mwh);
            assert_eq!(a.iee_optimal_mwh, Some(b.iee_mwh));
        }
        let differ = iee_compare(&nai, &nsi, &f, &f_ref, fixed, BiasInput::Series(&other)).unwrap();
        assert!(differ.iter().any(|r| r.iee_optimal_mwh != Some(r.iee_mwh)));
    }

    proptest! {
        #[test]
        fn identity_holds_bitwise(
            pairs in prop::collection::vec((-1e4f64..1e4, -1e4f64..1e4), 1..50)
        ) {
            let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let d: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            for r in compose_ace(&mw(a), &mw(d)).unwrap() {
                prop_assert_eq!(r.ace_total - (r.ace_f + r.delta_f_interchange), 0.0);
            }
        }

        #[test]
        fn load_deviation_linear(
            df in prop::collection::vec(-0.05f64..0.05, 1..40),
            b1 in 100.0f64..5000.0,
            b2 in 100.0f64..5000.0,
            c in -3.0f64..3.0,
        ) {
            let d = hz(df.clone());
            let scaled = hz(df.iter().map(|v| v * c).collect());
            let one = estimate_load_deviation(BiasInput::Fixed(BiasValue::mw_per_hz(b1)), &d).unwrap().dp_l;
            let two = estimate_load_deviation(BiasInput::Fixed(BiasValue::mw_per_hz(b2)), &d).unwrap().dp_l;
            let sum = estimate_load_deviation(BiasInput::Fixed(BiasValue::mw_per_hz(b1 + b2)), &d).unwrap().dp_l;
            let sc = estimate_load_deviation(BiasInput::Fixed(BiasValue::mw_per_hz(b1)), &scaled).unwrap().dp_l;
            for k in 0..df.len() {
                let tol = 1e-9 * (1.0 + sum.values()[k].abs());
                prop_assert!((one.values()[k] + two.values()[k] - sum.values()[k]).abs() <= tol);
                prop_assert!((c * one.values()[k] - sc.values()[k]).abs() <= 1e-9 * (1.0 + sc.values()[k].abs()));
            }
        }

        #[test]
        fn unit_coherence(df in prop::collection::vec(-0.05f64..0.05, 1..40), b in 1.0f64..1000.0) {
            let d = hz(df);
            let a = ace_f_from_bias(BiasInput::Fixed(BiasValue::mw_per_0p1hz(b)), &d).unwrap();
            let c = ace_f_from_bias(BiasInput::Fixed(BiasValue::mw_per_hz(10.0 * b)), &d).unwrap();
            for (x, y) in a.values().iter().zip(c.values()) {
                prop_assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300));
            }
        }

        #[test]
        fn hourly_conservation(
            hours in 1usize..6,
            seed in prop::collection::vec(-500.0f64..500.0, 360),
        ) {
            let n = hours * 60;
            let nai = mw(seed[..n].to_vec());
            let nsi = mw(vec![0.0; n]);
            let total: f64 = iee_hourly(&nai, &nsi).unwrap().iter().map(|r| r.iee_mwh).sum();
            let integral: f64 = seed[..n].iter().sum::<f64>() / 60.0;
            prop_assert!((total - integral).abs() < 1e-9);
        }
    }
}
