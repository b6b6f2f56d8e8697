//! Minute telemetry CSV: ingestion, validation and emission.
//!
//! Columns (header order and case are free):
//! `timestamp, delta_t_mw, ace_f_mw, f_ref_hz, f_hz, p_g_mw, nai_mw`, and
//! optionally `nsi_mw`. Timestamps are RFC 3339 or `YYYY-MM-DD HH:MM:SS`
//! taken as UTC, and must advance by exactly 60 s.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, DurationRound, NaiveDateTime, TimeDelta, Utc};
use freqbias_core::{DroopTruth, SyntheticDataset, TimeSeries, Unit};

use crate::error::{CliError, Result};

pub const TIMESTAMP: &str = "timestamp";
pub const DELTA_T: &str = "delta_t_mw";
pub const ACE_F: &str = "ace_f_mw";
pub const F_REF: &str = "f_ref_hz";
pub const F: &str = "f_hz";
pub const P_G: &str = "p_g_mw";
pub const NAI: &str = "nai_mw";
pub const NSI: &str = "nsi_mw";

const REQUIRED: [&str; 6] = [DELTA_T, ACE_F, F_REF, F, P_G, NAI];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GapPolicy {
    #[default]
    Reject,
    /// Drop every clock hour that is not fully present.
    DropHour,
}

impl FromStr for GapPolicy {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "reject" => Ok(GapPolicy::Reject),
            "drop_hour" => Ok(GapPolicy::DropHour),
            other => Err(CliError::Config(format!(
                "gap policy {other:?}, expected reject or drop_hour"
            ))),
        }
    }
}

/// Validated telemetry. All series share one start and a 60 s period.
/// After hours are dropped the samples are packed back to back, so
/// `timestamps` rather than the series clock gives each sample's time.
#[derive(Debug, Clone, PartialEq)]
pub struct Telemetry {
    pub timestamps: Vec<DateTime<Utc>>,
    pub delta_t: TimeSeries,
    pub ace_f: TimeSeries,
    pub f_ref: TimeSeries,
    pub f: TimeSeries,
    pub p_g: TimeSeries,
    pub nai: TimeSeries,
    pub nsi: Option<TimeSeries>,
    /// One entry per clock hour spanned by the input; `false` if dropped.
    pub hour_mask: Vec<bool>,
}

impl Telemetry {
    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    /// Interchange part of ACE. `NAI − NSI` when NSI is present, otherwise
    /// the recorded `delta_t_mw` column. `flip` negates it.
    pub fn interchange_deviation(&self, flip: bool) -> Result<TimeSeries> {
        let dev = match &self.nsi {
            Some(nsi) => freqbias_core::interchange_deviation(&self.nai, nsi)?,
            None => self.delta_t.clone(),
        };
        if flip {
            let neg = dev.values().iter().map(|v| -v).collect();
            return Ok(dev.with_values(neg, Unit::Mw)?);
        }
        Ok(dev)
    }
}

fn parse_timestamp(s: &str, row: usize) -> Result<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(t.with_timezone(&Utc));
    }
    NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S")
        .map(|t| t.and_utc())
        .map_err(|e| CliError::BadTimestamp {
            row,
            detail: format!("{s:?}: {e}"),
        })
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

struct Row {
    t: DateTime<Utc>,
    values: [f64; 7],
}

pub fn ingest_csv(path: &Path, policy: GapPolicy) -> Result<Telemetry> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    ingest_reader(file, policy)
}

pub fn ingest_reader<R: Read>(reader: R, policy: GapPolicy) -> Result<Telemetry> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: HashMap<String, usize> = rdr
        .headers()?
        .iter()
        .enumerate()
        .map(|(i, h)| (h.to_ascii_lowercase(), i))
        .collect();
    let column = |name: &str| {
        headers
            .get(name)
            .copied()
            .ok_or_else(|| CliError::MissingColumn(name.to_string()))
    };
    let ts_col = column(TIMESTAMP)?;
    let mut cols = Vec::with_capacity(7);
    for name in REQUIRED {
        cols.push((name, column(name)?));
    }
    let has_nsi = headers.contains_key(NSI);
    if has_nsi {
        cols.push((NSI, column(NSI)?));
    }

    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        // header is line 1
        let row = i + 2;
        let t = parse_timestamp(record.get(ts_col).unwrap_or(""), row)?;
        let mut values = [0.0; 7];
        for (slot, (name, idx)) in values.iter_mut().zip(&cols) {
            let v = record
                .get(*idx)
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::NonFinite {
                    row,
                    column: name.to_string(),
                })?;
            *slot = v;
        }
        rows.push((row, Row { t, values }));
    }
    if rows.is_empty() {
        return Err(freqbias_core::Error::EmptySeries.into());
    }

    let minute = TimeDelta::seconds(60);
    let first_hour = rows[0].1.t.duration_trunc(TimeDelta::hours(1)).expect("hour truncation");
    let hour_of = |t: DateTime<Utc>| ((t - first_hour).num_seconds() / 3600) as usize;
    for pair in rows.windows(2) {
        let (_, a) = &pair[0];
        let (row, b) = &pair[1];
        if b.t <= a.t {
            return Err(CliError::BadTimestamp {
                row: *row,
                detail: format!("{} does not follow {}", format_timestamp(&b.t), format_timestamp(&a.t)),
            });
        }
        if policy == GapPolicy::Reject && b.t - a.t != minute {
            return Err(CliError::GapRejected(hour_of(a.t)));
        }
        if b.t.timestamp() % 60 != a.t.timestamp() % 60 {
            return Err(CliError::BadTimestamp {
                row: *row,
                detail: "samples are not on a common minute grid".into(),
            });
        }
    }

    let n_hours = hour_of(rows.last().expect("nonempty").1.t) + 1;
    let mut hour_mask = vec![true; n_hours];
    if policy == GapPolicy::DropHour {
        let mut counts = vec![0usize; n_hours];
        for (_, r) in &rows {
            counts[hour_of(r.t)] += 1;
        }
        for (keep, c) in hour_mask.iter_mut().zip(&counts) {
            *keep = *c == 60;
        }
        rows.retain(|(_, r)| hour_mask[hour_of(r.t)]);
        if rows.is_empty() {
            return Err(CliError::GapRejected(0));
        }
    }

    let start = rows[0].1.t;
    let column_series = |j: usize, unit: Unit| -> Result<TimeSeries> {
        Ok(TimeSeries::minutes(start, rows.iter().map(|(_, r)| r.values[j]).collect(), unit)?)
    };
    Ok(Telemetry {
        timestamps: rows.iter().map(|(_, r)| r.t).collect(),
        delta_t: column_series(0, Unit::Mw)?,
        ace_f: column_series(1, Unit::Mw)?,
        f_ref: column_series(2, Unit::Hz)?,
        f: column_series(3, Unit::Hz)?,
        p_g: column_series(4, Unit::Mw)?,
        nai: column_series(5, Unit::Mw)?,
        nsi: if has_nsi { Some(column_series(6, Unit::Mw)?) } else { None },
        hour_mask,
    })
}

/// Writes a simulated dataset in the ingestion schema. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn write_dataset<W: Write>(ds: &SyntheticDataset, out: W) -> Result<()> {
    let dev = ds.interchange_deviation()?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record([TIMESTAMP, DELTA_T, ACE_F, F_REF, F, P_G, NAI, NSI])?;
    for k in 0..ds.len() {
        let t = format_timestamp(&ds.f.time_at(k));
        let cells = [
            dev.values()[k],
            ds.ace_f.values()[k],
            ds.f_ref.values()[k],
            ds.f.values()[k],
            ds.p_g.values()[k],
            ds.nai.values()[k],
            ds.nsi.values()[k],
        ];
        let mut record = vec![t];
        record.extend(cells.iter().map(|v| v.to_string()));
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| CliError::io("<csv stream>", e))?;
    Ok(())
}

pub fn write_dataset_csv(ds: &SyntheticDataset, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_dataset(ds, file)
}

pub fn write_truth_csv(truth: &[DroopTruth], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["minute", "alpha", "sigma", "beta_mw_per_hz"])?;
    for (k, t) in truth.iter().enumerate() {
        w.write_record([
            k.to_string(),
            t.alpha.to_string(),
            t.sigma.to_string(),
            t.beta_mw_per_hz.to_string(),
        ])?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}

pub fn read_truth_csv(path: &Path) -> Result<Vec<DroopTruth>> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_ascii_lowercase).collect();
    let idx = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::MissingColumn(name.to_string()))
    };
    let cols = [idx("alpha")?, idx("sigma")?, idx("beta_mw_per_hz")?];
    let names = ["alpha", "sigma", "beta_mw_per_hz"];
    let mut out = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let mut v = [0.0; 3];
        for ((slot, c), name) in v.iter_mut().zip(cols).zip(names) {
            *slot = record
                .get(c)
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|x| x.is_finite())
                .ok_or_else(|| CliError::NonFinite {
                    row: i + 2,
                    column: name.to_string(),
                })?;
        }
        out.push(DroopTruth {
            alpha: v[0],
            sigma: v[1],
            beta_mw_per_hz: v[2],
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn day_csv(minutes: usize, skip: Option<usize>) -> String {
        let mut s = String::from("Timestamp,f_hz,F_REF_HZ,p_g_mw,nai_mw,ace_f_mw,delta_t_mw\n");
        for k in 0..minutes {
            if Some(k) == skip {
                continue;
            }
            let h = k / 60;
            let m = k % 60;
            s.push_str(&format!("2017-10-24T{h:02}:{m:02}:00Z,60.001,60,-4900,10,-4.09,0\n"));
        }
        s
    }

    #[test]
    fn happy_path_order_insensitive() {
        let t = ingest_reader(day_csv(1440, None).as_bytes(), GapPolicy::Reject).unwrap();
        assert_eq!(t.len(), 1440);
        assert_eq!(t.f.len(), 1440);
        assert_eq!(t.nai.values()[0], 10.0);
        assert!(t.nsi.is_none());
        assert_eq!(t.hour_mask, vec![true; 24]);
    }

    #[test]
    fn missing_column() {
        let csv = "timestamp,f_hz,p_g_mw,nai_mw,ace_f_mw,delta_t_mw\n";
        match ingest_reader(csv.as_bytes(), GapPolicy::Reject) {
            Err(CliError::MissingColumn(c)) => assert_eq!(c, F_REF),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            ingest_reader("".as_bytes(), GapPolicy::Reject),
            Err(CliError::MissingColumn(_))
        ));
    }

    #[test]
    fn gaps() {
        let csv = day_csv(1440, Some(130));
        assert!(matches!(
            ingest_reader(csv.as_bytes(), GapPolicy::Reject),
            Err(CliError::GapRejected(2))
        ));
        let t = ingest_reader(csv.as_bytes(), GapPolicy::DropHour).unwrap();
        assert_eq!(t.len(), 1380);
        assert!(!t.hour_mask[2]);
        assert_eq!(t.hour_mask.iter().filter(|k| **k).count(), 23);
    }

    #[test]
    fn bad_rows() {
        let csv = "timestamp,f_hz,f_ref_hz,p_g_mw,nai_mw,ace_f_mw,delta_t_mw\n\
                   2017-10-24T00:00:00Z,60,60,1,1,1,1\n\
                   yesterday,60,60,1,1,1,1\n";
        assert!(matches!(
            ingest_reader(csv.as_bytes(), GapPolicy::Reject),
            Err(CliError::BadTimestamp { row: 3, .. })
        ));
        let csv = "timestamp,f_hz,f_ref_hz,p_g_mw,nai_mw,ace_f_mw,delta_t_mw\n\
                   2017-10-24 00:00:00,60,60,NaN,1,1,1\n";
        match ingest_reader(csv.as_bytes(), GapPolicy::Reject) {
            Err(CliError::NonFinite { row, column }) => assert_eq!((row, column.as_str()), (2, P_G)),
            other => panic!("{other:?}"),
        }
        let csv = "timestamp,f_hz,f_ref_hz,p_g_mw,nai_mw,ace_f_mw,delta_t_mw\n\
                   2017-10-24T00:01:00Z,60,60,1,1,1,1\n\
                   2017-10-24T00:00:00Z,60,60,1,1,1,1\n";
        assert!(matches!(
            ingest_reader(csv.as_bytes(), GapPolicy::Reject),
            Err(CliError::BadTimestamp { row: 3, .. })
        ));
    }

    #[test]
    fn interchange_falls_back_to_recorded_column() {
        let t = ingest_reader(day_csv(60, None).as_bytes(), GapPolicy::Reject).unwrap();
        assert!(t.interchange_deviation(false).unwrap().values().iter().all(|v| *v == 0.0));
        let csv = "timestamp,f_hz,f_ref_hz,p_g_mw,nai_mw,nsi_mw,ace_f_mw,delta_t_mw\n\
                   2017-10-24T00:00:00Z,60,60,1,12,10,1,0\n";
        let t = ingest_reader(csv.as_bytes(), GapPolicy::Reject).unwrap();
        assert_eq!(t.interchange_deviation(false).unwrap().values(), &[2.0]);
        assert_eq!(t.interchange_deviation(true).unwrap().values(), &[-2.0]);
    }
}
