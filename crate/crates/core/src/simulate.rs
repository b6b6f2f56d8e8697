//! Synthetic balancing-area telemetry with known droop parameters.
//!
//! Each minute is sampled at the steady state of the aggregate droop line
//! `f = α·f_ref − σ·P`. The plant-level transients settle in seconds (see
//! [`crate::gtg`]), well inside one sampling period.
//!
//! Per minute `k`:
//!
//! ```text
//! unregulated[k] = ΔP_L[k] − P_reg[k]
//! f[k]           = f_ref − σ[k]·unregulated[k]
//! P[k]           = −D·f_ref + unregulated[k]
//! ACE_f[k]       = −β_op·(f[k] − f_ref)
//! ACE[k]         = ACE_f[k] + (NAI[k] − NSI[k])
//! P_reg[k+1]     = P_reg[k] + ACE[k]             (AGC on)
//! ```
//!
//! where `D` is the area damping, `α[k] = 1 − σ[k]·D`, and `β_op` is the
//! bias the simulated operator uses in its ACE. `P` is the generation
//! expressed in the frame where the droop line has no intercept, which
//! places it at `−D·f_ref` when the area is balanced.

use chrono::{DateTime, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::area::AreaDroop;
use crate::error::{Error, Result};
use crate::timeseries::{BiasValue, TimeSeries, Unit, MINUTE_S};

/// Proportional AGC gain applied to ACE once per minute.
pub const AGC_GAIN: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub enum LoadModel {
    Constant,
    /// Each minute adds a uniform draw from `[-step_mw, step_mw]`.
    RandomWalk { step_mw: f64 },
    /// `x[k] = rho·x[k-1] + N(0, noise_mw²)`.
    Ar1 { rho: f64, noise_mw: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum InterchangeModel {
    /// Actual interchange follows the schedule.
    Zero,
    /// Per-minute deviation NAI − NSI in MW.
    Exogenous(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum BiasSchedule {
    /// The area's own bias for every minute.
    Constant,
    /// `(first_minute, beta_mw_per_hz)` segments; the first must start at 0.
    Piecewise(Vec<(usize, f64)>),
    Sinusoidal {
        mean_mw_per_hz: f64,
        amplitude_mw_per_hz: f64,
        period_minutes: f64,
        phase_rad: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceSpec {
    pub seed: u64,
    pub load_model: LoadModel,
    pub interchange_model: InterchangeModel,
    pub bias_schedule: BiasSchedule,
    pub start: DateTime<Utc>,
    pub scheduled_frequency_hz: f64,
    pub base_load_mw: f64,
    /// Bias used by the simulated operator's ACE. `None` means the operator
    /// tracks the true bias every minute.
    pub operator_bias: Option<BiasValue>,
}

impl Default for DisturbanceSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            load_model: LoadModel::Constant,
            interchange_model: InterchangeModel::Zero,
            bias_schedule: BiasSchedule::Constant,
            start: Utc.with_ymd_and_hms(2017, 10, 14, 0, 0, 0).unwrap(),
            scheduled_frequency_hz: 60.0,
            base_load_mw: 30_000.0,
            operator_bias: None,
        }
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidSpec(msg.into())
}

impl DisturbanceSpec {
    pub fn validate(&self, minutes: usize) -> Result<()> {
        match self.load_model {
            LoadModel::Constant => {}
            LoadModel::RandomWalk { step_mw } => {
                if !(step_mw >= 0.0) || !step_mw.is_finite() {
                    return Err(invalid(format!("random-walk step {step_mw} must be >= 0")));
                }
            }
            LoadModel::Ar1 { rho, noise_mw } => {
                if !(0.0..1.0).contains(&rho) {
                    return Err(invalid(format!("AR(1) rho {rho} outside [0, 1)")));
                }
                if !(noise_mw >= 0.0) || !noise_mw.is_finite() {
                    return Err(invalid(format!("AR(1) noise {noise_mw} must be >= 0")));
                }
            }
        }
        if let InterchangeModel::Exogenous(dev) = &self.interchange_model {
            if dev.len() < minutes {
                return Err(invalid(format!(
                    "exogenous interchange has {} samples, need {minutes}",
                    dev.len()
                )));
            }
            if dev.iter().any(|v| !v.is_finite()) {
                return Err(invalid("exogenous interchange contains non-finite values"));
            }
        }
        match &self.bias_schedule {
            BiasSchedule::Constant => {}
            BiasSchedule::Piecewise(segments) => {
                if segments.first().map(|s| s.0) != Some(0) {
                    return Err(invalid("piecewise bias schedule must start at minute 0"));
                }
                if segments.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(invalid("piecewise bias segments must be strictly increasing"));
                }
                if segments.iter().any(|s| !(s.1 > 0.0) || !s.1.is_finite()) {
                    return Err(invalid("piecewise bias values must be positive"));
                }
            }
            BiasSchedule::Sinusoidal {
                mean_mw_per_hz,
                amplitude_mw_per_hz,
                period_minutes,
                phase_rad,
            } => {
                if !(mean_mw_per_hz - amplitude_mw_per_hz.abs() > 0.0) {
                    return Err(invalid("sinusoidal bias must stay positive"));
                }
                if !(*period_minutes > 0.0) || !phase_rad.is_finite() {
                    return Err(invalid("sinusoidal bias needs a positive period"));
                }
            }
        }
        if !(self.scheduled_frequency_hz > 0.0) || !self.base_load_mw.is_finite() {
            return Err(invalid("scheduled frequency and base load must be finite and positive"));
        }
        if let Some(b) = self.operator_bias {
            let v = b.to_mw_per_hz()?;
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid("operator bias must be positive"));
            }
        }
        Ok(())
    }

    fn beta_at(&self, area: &AreaDroop, minute: usize) -> f64 {
        match &self.bias_schedule {
            BiasSchedule::Constant => area.beta.magnitude,
            BiasSchedule::Piecewise(segments) => segments
                .iter()
                .take_while(|s| s.0 <= minute)
                .last()
                .map(|s| s.1)
                .unwrap_or(area.beta.magnitude),
            BiasSchedule::Sinusoidal {
                mean_mw_per_hz,
                amplitude_mw_per_hz,
                period_minutes,
                phase_rad,
            } => {
                let angle = 2.0 * std::f64::consts::PI * minute as f64 / period_minutes + phase_rad;
                mean_mw_per_hz + amplitude_mw_per_hz * angle.sin()
            }
        }
    }
}

/// Seeded per-minute interchange deviation, uniform in
/// `[-half_width_mw, half_width_mw]`, for use with
/// [`InterchangeModel::Exogenous`].
pub fn uniform_interchange(seed: u64, minutes: usize, half_width_mw: f64) -> Result<Vec<f64>> {
    if !(half_width_mw >= 0.0) || !half_width_mw.is_finite() {
        return Err(invalid(format!("interchange half width {half_width_mw} must be >= 0")));
    }
    if half_width_mw == 0.0 {
        return Ok(vec![0.0; minutes]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..minutes)
        .map(|_| rng.random_range(-half_width_mw..=half_width_mw))
        .collect())
}

/// Ground-truth droop parameters for one minute.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DroopTruth {
    pub alpha: f64,
    pub sigma: f64,
    pub beta_mw_per_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub f: TimeSeries,
    pub f_ref: TimeSeries,
    pub p_g: TimeSeries,
    pub nai: TimeSeries,
    pub nsi: TimeSeries,
    pub p_l_true: TimeSeries,
    /// AGC regulation power in effect each minute.
    pub p_reg: TimeSeries,
    /// Frequency part of ACE as computed by the simulated operator.
    pub ace_f: TimeSeries,
    pub truth: Vec<DroopTruth>,
    pub base_load_mw: f64,
}

impl SyntheticDataset {
    pub fn len(&self) -> usize {
        self.f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f.is_empty()
    }

    /// `f − f_ref` in Hz.
    pub fn delta_f(&self) -> Result<TimeSeries> {
        self.f.subtract(&self.f_ref)
    }

    /// `NAI − NSI` in MW.
    pub fn interchange_deviation(&self) -> Result<TimeSeries> {
        self.nai.subtract(&self.nsi)
    }

    pub fn truth_beta(&self) -> Result<TimeSeries> {
        self.f.with_values(
            self.truth.iter().map(|t| t.beta_mw_per_hz).collect(),
            Unit::MwPerHz,
        )
    }

    /// True load deviation from the scheduled base load, MW.
    pub fn load_deviation(&self) -> Vec<f64> {
        self.p_l_true
            .values()
            .iter()
            .map(|l| l - self.base_load_mw)
            .collect()
    }

    /// `ΔP_L − P_reg`: the part of the load deviation not yet covered by AGC.
    pub fn unregulated_imbalance(&self) -> Vec<f64> {
        self.load_deviation()
            .iter()
            .zip(self.p_reg.values())
            .map(|(l, r)| l - r)
            .collect()
    }
}

fn load_process(model: &LoadModel, minutes: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let mut dev = Vec::with_capacity(minutes);
    match *model {
        LoadModel::Constant => dev.resize(minutes, 0.0),
        LoadModel::RandomWalk { step_mw } => {
            let mut x = 0.0;
            dev.push(x);
            for _ in 1..minutes {
                if step_mw > 0.0 {
                    x += rng.random_range(-step_mw..=step_mw);
                }
                dev.push(x);
            }
        }
        LoadModel::Ar1 { rho, noise_mw } => {
            let normal = Normal::new(0.0, noise_mw).map_err(|e| invalid(e.to_string()))?;
            let mut x = 0.0;
            dev.push(x);
            for _ in 1..minutes {
                x = rho * x + normal.sample(rng);
                dev.push(x);
            }
        }
    }
    Ok(dev)
}

fn run(
    area: &AreaDroop,
    spec: &DisturbanceSpec,
    minutes: usize,
    agc_enabled: bool,
    nsi: &[f64],
    interchange_dev: &[f64],
) -> Result<SyntheticDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let load_dev = load_process(&spec.load_model, minutes, &mut rng)?;
    let f_sched = spec.scheduled_frequency_hz;
    let damping = area.damping_mw_per_hz;
    let operator_beta = spec.operator_bias.map(|b| b.to_mw_per_hz()).transpose()?;

    let mut f = Vec::with_capacity(minutes);
    let mut p_g = Vec::with_capacity(minutes);
    let mut nai = Vec::with_capacity(minutes);
    let mut p_l = Vec::with_capacity(minutes);
    let mut p_reg_series = Vec::with_capacity(minutes);
    let mut ace_f = Vec::with_capacity(minutes);
    let mut truth = Vec::with_capacity(minutes);

    let mut p_reg = 0.0;
    for k in 0..minutes {
        let beta = spec.beta_at(area, k);
        let sigma = 1.0 / beta;
        let alpha = 1.0 - sigma * damping;
        truth.push(DroopTruth {
            alpha,
            sigma,
            beta_mw_per_hz: beta,
        });

        let unregulated = load_dev[k] - p_reg;
        let freq = f_sched - sigma * unregulated;
        let beta_op = operator_beta.unwrap_or(beta);
        let frequency_part = -beta_op * (freq - f_sched);
        let ace = frequency_part + interchange_dev[k];

        f.push(freq);
        p_g.push(-damping * f_sched + unregulated);
        nai.push(nsi[k] + interchange_dev[k]);
        p_l.push(spec.base_load_mw + load_dev[k]);
        p_reg_series.push(p_reg);
        ace_f.push(frequency_part);

        if agc_enabled {
            p_reg += AGC_GAIN * ace;
        }
    }

    let start = spec.start;
    let series = |values: Vec<f64>, unit| TimeSeries::new(start, MINUTE_S, values, unit);
    Ok(SyntheticDataset {
        f: series(f, Unit::Hz)?,
        f_ref: series(vec![f_sched; minutes], Unit::Hz)?,
        p_g: series(p_g, Unit::Mw)?,
        nai: series(nai, Unit::Mw)?,
        nsi: series(nsi[..minutes].to_vec(), Unit::Mw)?,
        p_l_true: series(p_l, Unit::Mw)?,
        p_reg: series(p_reg_series, Unit::Mw)?,
        ace_f: series(ace_f, Unit::Mw)?,
        truth,
        base_load_mw: spec.base_load_mw,
    })
}

/// Simulates one balancing area for `minutes` minutes with a zero
/// interchange schedule.
pub fn simulate_ba(
    area: &AreaDroop,
    spec: &DisturbanceSpec,
    minutes: usize,
    agc_enabled: bool,
) -> Result<SyntheticDataset> {
    if minutes < 2 {
        return Err(invalid(format!("need at least 2 minutes, got {minutes}")));
    }
    spec.validate(minutes)?;
    let dev = match &spec.interchange_model {
        InterchangeModel::Zero => vec![0.0; minutes],
        InterchangeModel::Exogenous(d) => d[..minutes].to_vec(),
    };
    run(area, spec, minutes, agc_enabled, &vec![0.0; minutes], &dev)
}

/// One area in a two-area interchange run.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaScenario {
    pub area: AreaDroop,
    pub spec: DisturbanceSpec,
    pub agc_enabled: bool,
}

/// Simulates two areas exchanging power. `schedule_nsi` is area A's net
/// scheduled export; B is scheduled the opposite. A's interchange model
/// sets the unscheduled flow and B sees its negation, so
/// `nai_a + nai_b = 0` every minute.
pub fn two_area_interchange(
    a: &AreaScenario,
    b: &AreaScenario,
    schedule_nsi: &TimeSeries,
) -> Result<(SyntheticDataset, SyntheticDataset)> {
    schedule_nsi
        .require_unit(Unit::Mw)
        .map_err(|e| Error::ScheduleMismatch(e.to_string()))?;
    if schedule_nsi.period_s() != MINUTE_S {
        return Err(Error::ScheduleMismatch(format!(
            "schedule period {} s, expected {MINUTE_S} s",
            schedule_nsi.period_s()
        )));
    }
    let minutes = schedule_nsi.len();
    if minutes < 2 {
        return Err(invalid(format!("need at least 2 minutes, got {minutes}")));
    }
    let dev_a = match &a.spec.interchange_model {
        InterchangeModel::Zero => vec![0.0; minutes],
        InterchangeModel::Exogenous(d) => {
            if d.len() != minutes {
                return Err(Error::ScheduleMismatch(format!(
                    "interchange deviation has {} samples, schedule has {minutes}",
                    d.len()
                )));
            }
            d.clone()
        }
    };
    let dev_b: Vec<f64> = dev_a.iter().map(|v| -v).collect();
    match &b.spec.interchange_model {
        InterchangeModel::Zero => {}
        InterchangeModel::Exogenous(d) if *d == dev_b => {}
        InterchangeModel::Exogenous(_) => {
            return Err(Error::ScheduleMismatch(
                "area B interchange must mirror area A".into(),
            ))
        }
    }

    let nsi_a = schedule_nsi.values().to_vec();
    let nsi_b: Vec<f64> = nsi_a.iter().map(|v| -v).collect();
    let mut spec_a = a.spec.clone();
    let mut spec_b = b.spec.clone();
    spec_a.start = schedule_nsi.start();
    spec_b.start = schedule_nsi.start();
    spec_a.interchange_model = InterchangeModel::Zero;
    spec_b.interchange_model = InterchangeModel::Zero;
    spec_a.validate(minutes)?;
    spec_b.validate(minutes)?;

    let ds_a = run(&a.area, &spec_a, minutes, a.agc_enabled, &nsi_a, &dev_a)?;
    let mut ds_b = run(&b.area, &spec_b, minutes, b.agc_enabled, &nsi_b, &dev_b)?;
    let mirrored: Vec<f64> = ds_a.nai.values().iter().map(|v| -v).collect();
    ds_b.nai = ds_b.nai.with_values(mirrored, Unit::Mw)?;
    Ok((ds_a, ds_b))
}
