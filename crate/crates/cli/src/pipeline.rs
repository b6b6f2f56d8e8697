//! Stage orchestration: estimate, decompose, reserves and report.

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use freqbias_core::estimator::beta_series;
use freqbias_core::{
    ace_f_from_bias, band_compliance, compose_ace, cost_savings, envelope_tightening, estimate_load_deviation,
    iee_compare_deviation, reserve_envelope, rolling_estimate, AceRecord, BiasInput, BiasValue, DroopEstimate,
    DroopTruth, EnvelopeBasis, IeeRecord, ReserveEnvelope, Tightening, TimeSeries, Unit,
};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::format::{fmt_sig9, sig9};
use crate::plot::emit_plot_data;
use crate::telemetry::{format_timestamp, Telemetry};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Estimate,
    Decompose,
    Reserves,
    Report,
}

/// Everything derived from one telemetry bundle.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub estimates: Vec<DroopEstimate>,
    /// Per-minute estimated bias in MW/Hz, held between estimates.
    pub beta: TimeSeries,
    pub delta_f: TimeSeries,
    pub interchange: TimeSeries,
    pub ace: Vec<AceRecord>,
    pub ace_f_fixed: TimeSeries,
    pub ace_f_estimated: TimeSeries,
    pub dp_l_fixed: TimeSeries,
    pub dp_l_estimated: TimeSeries,
    pub iee: Vec<IeeRecord>,
    pub envelopes_dp_l: Vec<ReserveEnvelope>,
    pub envelopes_ace: Vec<ReserveEnvelope>,
    pub tightening: Tightening,
    pub band_compliance: f64,
}

pub fn estimate(tel: &Telemetry, cfg: &RunConfig) -> Result<(Vec<DroopEstimate>, TimeSeries)> {
    let estimates = rolling_estimate(&tel.f, &tel.f_ref, &tel.p_g, &cfg.estimator)?;
    let beta = beta_series(&estimates, &tel.f, cfg.fixed_beta)?;
    Ok((estimates, beta))
}

pub fn analyze(tel: &Telemetry, cfg: &RunConfig) -> Result<Analysis> {
    let (estimates, beta) = estimate(tel, cfg)?;
    let delta_f = tel.f.subtract(&tel.f_ref)?;
    let interchange = tel.interchange_deviation(cfg.flip_interchange_sign)?;
    let ace = compose_ace(&tel.ace_f, &interchange)?;
    let fixed = BiasInput::Fixed(cfg.fixed_beta);
    let estimated = BiasInput::Series(&beta);
    let ace_f_fixed = ace_f_from_bias(fixed, &delta_f)?;
    let ace_f_estimated = ace_f_from_bias(estimated, &delta_f)?;
    let dp_l_fixed = estimate_load_deviation(fixed, &delta_f)?.dp_l;
    let dp_l_estimated = estimate_load_deviation(estimated, &delta_f)?.dp_l;
    let iee = iee_compare_deviation(&interchange, &tel.f, &tel.f_ref, cfg.fixed_beta, estimated)?;

    let ace_total = tel
        .ace_f
        .with_values(ace.iter().map(|r| r.ace_total).collect(), Unit::Mw)?;
    let envelopes_dp_l = reserve_envelope(&dp_l_estimated, cfg.quantile, EnvelopeBasis::DpL)?;
    let envelopes_ace = reserve_envelope(&ace_total, cfg.quantile, EnvelopeBasis::Ace)?;
    let tightening = envelope_tightening(&ace_total, &tel.ace_f, cfg.quantile)?;
    let band_compliance = band_compliance(&tel.f, &tel.f_ref, &cfg.band)?;

    Ok(Analysis {
        estimates,
        beta,
        delta_f,
        interchange,
        ace,
        ace_f_fixed,
        ace_f_estimated,
        dp_l_fixed,
        dp_l_estimated,
        iee,
        envelopes_dp_l,
        envelopes_ace,
        tightening,
        band_compliance,
    })
}

/// Keys of `summary.json`. Non-finite numbers, and fields a stage does not
/// compute, are written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub samples: usize,
    pub hours_kept: usize,
    pub hours_dropped: usize,
    pub window_minutes: usize,
    pub fixed_beta_mw_per_hz: Option<f64>,
    pub estimates: usize,
    pub ill_conditioned_windows: usize,
    pub beta_mean_mw_per_hz: Option<f64>,
    pub beta_min_mw_per_hz: Option<f64>,
    pub beta_max_mw_per_hz: Option<f64>,
    /// Only with a truth file.
    pub max_relative_beta_error: Option<f64>,
    pub ace_identity_max_abs_mw: Option<f64>,
    pub band_compliance: Option<f64>,
    pub iee_total_mwh: Option<f64>,
    pub iee_optimal_total_mwh: Option<f64>,
    pub quantile: Option<f64>,
    pub mean_reg_up_dp_l_mw: Option<f64>,
    pub mean_reg_down_dp_l_mw: Option<f64>,
    pub mean_reg_up_ace_mw: Option<f64>,
    pub mean_reg_down_ace_mw: Option<f64>,
    pub tightening_average_mw: Option<f64>,
    pub savings_cents: Option<i64>,
    pub savings: Option<String>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

pub fn max_relative_beta_error(estimates: &[DroopEstimate], truth: &[DroopTruth]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for e in estimates {
        let t = truth.get(e.minute_index).ok_or_else(|| {
            CliError::Config(format!(
                "truth file has {} rows, estimate at minute {}",
                truth.len(),
                e.minute_index
            ))
        })?;
        let b = e.beta.to_mw_per_hz()?;
        worst = worst.max(((b - t.beta_mw_per_hz) / t.beta_mw_per_hz).abs());
    }
    Ok(worst)
}

pub fn summarize(
    tel: &Telemetry,
    estimates: &[DroopEstimate],
    analysis: Option<&Analysis>,
    cfg: &RunConfig,
    truth: Option<&[DroopTruth]>,
) -> Result<Summary> {
    let finite: Vec<f64> = estimates
        .iter()
        .map(|e| e.beta.magnitude)
        .filter(|b| b.is_finite())
        .collect();
    let kept = tel.hour_mask.iter().filter(|k| **k).count();
    let mut s = Summary {
        samples: tel.len(),
        hours_kept: kept,
        hours_dropped: tel.hour_mask.len() - kept,
        window_minutes: cfg.estimator.window_minutes,
        fixed_beta_mw_per_hz: sig9(cfg.fixed_beta.to_mw_per_hz()?),
        estimates: estimates.len(),
        ill_conditioned_windows: estimates.iter().filter(|e| e.ill_conditioned).count(),
        beta_mean_mw_per_hz: sig9(mean(finite.iter().copied())),
        beta_min_mw_per_hz: sig9(finite.iter().copied().fold(f64::INFINITY, f64::min)),
        beta_max_mw_per_hz: sig9(finite.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        max_relative_beta_error: truth
            .map(|t| max_relative_beta_error(estimates, t))
            .transpose()?
            .and_then(sig9),
        ace_identity_max_abs_mw: None,
        band_compliance: None,
        iee_total_mwh: None,
        iee_optimal_total_mwh: None,
        quantile: None,
        mean_reg_up_dp_l_mw: None,
        mean_reg_down_dp_l_mw: None,
        mean_reg_up_ace_mw: None,
        mean_reg_down_ace_mw: None,
        tightening_average_mw: None,
        savings_cents: None,
        savings: None,
    };
    let Some(a) = analysis else {
        return Ok(s);
    };
    let identity = a
        .ace
        .iter()
        .map(|r| (r.ace_total - (r.ace_f + r.delta_f_interchange)).abs())
        .fold(0.0, f64::max);
    // a widening (negative tightening) saves nothing
    let savings = cost_savings(a.tightening.average_mw.max(0.0), &cfg.cost)?;
    s.ace_identity_max_abs_mw = sig9(identity);
    s.band_compliance = sig9(a.band_compliance);
    s.iee_total_mwh = sig9(a.iee.iter().map(|r| r.iee_mwh).sum());
    s.iee_optimal_total_mwh = sig9(a.iee.iter().filter_map(|r| r.iee_optimal_mwh).sum());
    s.quantile = sig9(cfg.quantile);
    s.mean_reg_up_dp_l_mw = sig9(mean(a.envelopes_dp_l.iter().map(|e| e.reg_up_mw)));
    s.mean_reg_down_dp_l_mw = sig9(mean(a.envelopes_dp_l.iter().map(|e| e.reg_down_mw)));
    s.mean_reg_up_ace_mw = sig9(mean(a.envelopes_ace.iter().map(|e| e.reg_up_mw)));
    s.mean_reg_down_ace_mw = sig9(mean(a.envelopes_ace.iter().map(|e| e.reg_down_mw)));
    s.tightening_average_mw = sig9(a.tightening.average_mw);
    s.savings_cents = Some(savings.cents);
    s.savings = Some(savings.to_string());
    Ok(s)
}

struct Table {
    path: PathBuf,
    w: csv::Writer<File>,
}

impl Table {
    fn create(dir: &Path, name: &str, header: &[&str]) -> Result<Self> {
        let path = dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(header)?;
        Ok(Self { path, w })
    }

    fn row(&mut self, cells: Vec<String>) -> Result<()> {
        self.w.write_record(&cells)?;
        Ok(())
    }

    fn finish(mut self) -> Result<PathBuf> {
        self.w.flush().map_err(|e| CliError::io(&self.path, e))?;
        Ok(self.path)
    }
}

fn write_estimates(dir: &Path, tel: &Telemetry, est: &[DroopEstimate]) -> Result<PathBuf> {
    let mut t = Table::create(
        dir,
        "estimates.csv",
        &[
            "minute_index",
            "timestamp",
            "alpha",
            "sigma_hz_per_mw",
            "beta_mw_per_hz",
            "beta_mw_per_0p1hz",
            "r_squared",
            "condition_number",
            "residual_rms_hz",
            "ill_conditioned",
        ],
    )?;
    for e in est {
        let b = e.beta.to_mw_per_hz()?;
        t.row(vec![
            e.minute_index.to_string(),
            format_timestamp(&tel.timestamps[e.minute_index]),
            fmt_sig9(e.alpha),
            fmt_sig9(e.sigma),
            fmt_sig9(b),
            fmt_sig9(b / 10.0),
            fmt_sig9(e.r_squared),
            fmt_sig9(e.condition_number),
            fmt_sig9(e.residual_rms),
            e.ill_conditioned.to_string(),
        ])?;
    }
    t.finish()
}

fn write_decomposition(dir: &Path, tel: &Telemetry, a: &Analysis) -> Result<Vec<PathBuf>> {
    let mut ace = Table::create(
        dir,
        "ace.csv",
        &[
            "minute_index",
            "timestamp",
            "ace_f_mw",
            "delta_f_interchange_mw",
            "ace_total_mw",
            "ace_f_fixed_beta_mw",
            "ace_f_estimated_beta_mw",
        ],
    )?;
    for r in &a.ace {
        let k = r.minute_index;
        ace.row(vec![
            k.to_string(),
            format_timestamp(&tel.timestamps[k]),
            fmt_sig9(r.ace_f),
            fmt_sig9(r.delta_f_interchange),
            fmt_sig9(r.ace_total),
            fmt_sig9(a.ace_f_fixed.values()[k]),
            fmt_sig9(a.ace_f_estimated.values()[k]),
        ])?;
    }

    let mut load = Table::create(
        dir,
        "load_deviation.csv",
        &["minute_index", "timestamp", "beta_estimated_mw_per_hz", "dp_l_fixed_mw", "dp_l_estimated_mw"],
    )?;
    for k in 0..tel.len() {
        load.row(vec![
            k.to_string(),
            format_timestamp(&tel.timestamps[k]),
            fmt_sig9(a.beta.values()[k]),
            fmt_sig9(a.dp_l_fixed.values()[k]),
            fmt_sig9(a.dp_l_estimated.values()[k]),
        ])?;
    }

    let mut iee = Table::create(dir, "iee.csv", &["hour_index", "timestamp", "iee_mwh", "iee_optimal_mwh"])?;
    for r in &a.iee {
        iee.row(vec![
            r.hour_index.to_string(),
            format_timestamp(&tel.timestamps[r.hour_index * 60]),
            fmt_sig9(r.iee_mwh),
            r.iee_optimal_mwh.map(fmt_sig9).unwrap_or_default(),
        ])?;
    }
    Ok(vec![ace.finish()?, load.finish()?, iee.finish()?])
}

fn write_reserves(dir: &Path, tel: &Telemetry, a: &Analysis) -> Result<Vec<PathBuf>> {
    let mut env = Table::create(
        dir,
        "envelopes.csv",
        &["hour_index", "timestamp", "basis", "quantile", "reg_up_mw", "reg_down_mw"],
    )?;
    for e in a.envelopes_dp_l.iter().chain(&a.envelopes_ace) {
        env.row(vec![
            e.hour_index.to_string(),
            format_timestamp(&tel.timestamps[e.hour_index * 60]),
            e.basis.to_string(),
            fmt_sig9(e.quantile),
            fmt_sig9(e.reg_up_mw),
            fmt_sig9(e.reg_down_mw),
        ])?;
    }
    let mut tight = Table::create(dir, "tightening.csv", &["hour_index", "timestamp", "tightening_mw"])?;
    for (h, v) in a.tightening.per_hour_mw.iter().enumerate() {
        tight.row(vec![h.to_string(), format_timestamp(&tel.timestamps[h * 60]), fmt_sig9(*v)])?;
    }
    Ok(vec![env.finish()?, tight.finish()?])
}

fn write_plots(dir: &Path, a: &Analysis, fixed: BiasValue) -> Result<Vec<PathBuf>> {
    let fixed = vec![fixed.to_mw_per_hz()?; a.beta.len()];
    let ace_total: Vec<f64> = a.ace.iter().map(|r| r.ace_total).collect();
    let minute = dir.join("plot_data.csv");
    emit_plot_data(
        &minute,
        "minute",
        &[
            ("beta_estimate", a.beta.values()),
            ("beta_fixed", &fixed),
            ("dp_l_estimated", a.dp_l_estimated.values()),
            ("ace_total", &ace_total),
        ],
    )?;
    let iee: Vec<f64> = a.iee.iter().map(|r| r.iee_mwh).collect();
    let opt: Vec<f64> = a.iee.iter().filter_map(|r| r.iee_optimal_mwh).collect();
    let hourly = dir.join("plot_iee.csv");
    emit_plot_data(&hourly, "hour", &[("iee", &iee), ("iee_optimal", &opt)])?;
    Ok(vec![minute, hourly])
}

/// Runs `stage` on `tel` and writes its files into `out`, plus
/// `summary.json`. Returns the summary and the paths written.
pub fn run_stage(
    stage: Stage,
    tel: &Telemetry,
    cfg: &RunConfig,
    truth: Option<&[DroopTruth]>,
    out: &Path,
) -> Result<(Summary, Vec<PathBuf>)> {
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let mut written = Vec::new();
    let (summary, est_path) = if stage == Stage::Estimate {
        // hour-level accounting is skipped so partial hours are fine here
        let (estimates, _) = estimate(tel, cfg)?;
        let p = write_estimates(out, tel, &estimates)?;
        (summarize(tel, &estimates, None, cfg, truth)?, Some(p))
    } else {
        let a = analyze(tel, cfg)?;
        let p = if stage == Stage::Report {
            Some(write_estimates(out, tel, &a.estimates)?)
        } else {
            None
        };
        if matches!(stage, Stage::Decompose | Stage::Report) {
            written.extend(write_decomposition(out, tel, &a)?);
        }
        if matches!(stage, Stage::Reserves | Stage::Report) {
            written.extend(write_reserves(out, tel, &a)?);
        }
        if stage == Stage::Report {
            written.extend(write_plots(out, &a, cfg.fixed_beta)?);
        }
        (summarize(tel, &a.estimates, Some(&a), cfg, truth)?, p)
    };
    written.splice(0..0, est_path);
    let path = out.join("summary.json");
    let mut text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::io(&path, std::io::Error::other(e)))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    written.push(path);
    Ok((summary, written))
}
