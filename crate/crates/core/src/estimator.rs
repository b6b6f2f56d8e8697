//! Rolling least-squares calibration of the area droop line.
//!
//! Within a window the model is `f[k] = α·f_ref[k] − σ·P[k]` with no
//! intercept. The least-squares solution solves the 2×2 normal equations
//! for the regressors `x1 = f_ref`, `x2 = −P`:
//!
//! ```text
//! | Σx1²   Σx1x2 | |α|   | Σx1·f |
//! | Σx1x2  Σx2²  | |σ| = | Σx2·f |
//! ```
//!
//! Telemetry frequencies sit near 60 Hz and generation far from zero, so
//! the raw sums nearly cancel in the determinant. The Gram entries are
//! instead assembled from window means and centered moments, which gives
//! the same determinant and numerators without the cancellation.

use crate::error::{Error, Result};
use crate::timeseries::{BiasValue, TimeSeries, Unit, Window};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub window_minutes: usize,
    pub stride_minutes: usize,
    /// Windows whose equilibrated normal matrix has a larger condition
    /// number are flagged ill-conditioned.
    pub condition_threshold: f64,
    /// Both regressors below this variance means the window carries no
    /// information about the droop.
    pub min_regressor_variance: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            window_minutes: 60,
            stride_minutes: 1,
            condition_threshold: 1e8,
            min_regressor_variance: 1e-12,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window_minutes < 2 {
            return Err(Error::InvalidConfig(format!(
                "window must be at least 2 minutes, got {}",
                self.window_minutes
            )));
        }
        if self.stride_minutes < 1 {
            return Err(Error::InvalidConfig("stride must be at least 1 minute".into()));
        }
        if !(self.condition_threshold >= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "condition threshold {} must be >= 1",
                self.condition_threshold
            )));
        }
        if !(self.min_regressor_variance >= 0.0) {
            return Err(Error::InvalidConfig(
                "minimum regressor variance must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DroopEstimate {
    /// Last minute of the window the estimate was fitted on.
    pub minute_index: usize,
    pub alpha: f64,
    /// Hz/MW. Exactly zero when the fit finds no power dependence.
    pub sigma: f64,
    /// MW/Hz, `1/σ`; infinite when `σ` is zero.
    pub beta: BiasValue,
    pub window: Window,
    pub r_squared: f64,
    pub condition_number: f64,
    pub residual_rms: f64,
    pub ill_conditioned: bool,
}

pub fn beta_from_sigma(sigma: f64) -> Result<BiasValue> {
    if sigma == 0.0 || !sigma.is_finite() {
        return Err(Error::ZeroSigma);
    }
    Ok(BiasValue::mw_per_hz(1.0 / sigma))
}

fn check_inputs(f: &TimeSeries, f_ref: &TimeSeries, p: &TimeSeries, w: Window) -> Result<()> {
    f.require_unit(Unit::Hz)?;
    f_ref.require_unit(Unit::Hz)?;
    p.require_unit(Unit::Mw)?;
    f.check_aligned(f_ref)?;
    f.check_aligned(p)?;
    w.check(f.len())?;
    if w.length < 2 {
        return Err(Error::SeriesTooShort {
            needed: 2,
            got: w.length,
        });
    }
    Ok(())
}

/// Sum of squared droop-line residuals over the window.
pub fn objective_value(
    f: &TimeSeries,
    f_ref: &TimeSeries,
    p: &TimeSeries,
    w: Window,
    alpha: f64,
    sigma: f64,
) -> Result<f64> {
    f.check_aligned(f_ref)?;
    f.check_aligned(p)?;
    w.check(f.len())?;
    Ok(sum_squared_residuals(
        &f.values()[w.range()],
        &f_ref.values()[w.range()],
        &p.values()[w.range()],
        alpha,
        sigma,
    ))
}

fn sum_squared_residuals(f: &[f64], f_ref: &[f64], p: &[f64], alpha: f64, sigma: f64) -> f64 {
    f.iter()
        .zip(f_ref)
        .zip(p)
        .map(|((fk, rk), pk)| {
            let e = fk - alpha * rk + sigma * pk;
            e * e
        })
        .sum()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Normal-equation quantities for one window.
struct NormalSystem {
    s11: f64,
    s22: f64,
    det: f64,
    alpha_num: f64,
    sigma_num: f64,
    var1: f64,
    var2: f64,
}

impl NormalSystem {
    fn assemble(f: &[f64], x1: &[f64], p: &[f64]) -> Self {
        let n = f.len() as f64;
        let m1 = mean(x1);
        let m2 = -mean(p);
        let mf = mean(f);
        let (mut c11, mut c22, mut c12, mut c1f, mut c2f) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for ((fk, x1k), pk) in f.iter().zip(x1).zip(p) {
            let d1 = x1k - m1;
            let d2 = -pk - m2;
            let df = fk - mf;
            c11 += d1 * d1;
            c22 += d2 * d2;
            c12 += d1 * d2;
            c1f += d1 * df;
            c2f += d2 * df;
        }
        // Σx1² = n·m1² + c11, etc.; the n²-order products cancel exactly.
        let det = n * (m1 * m1 * c22 + m2 * m2 * c11 - 2.0 * m1 * m2 * c12) + (c11 * c22 - c12 * c12);
        let alpha_num =
            n * (m2 * m2 * c1f + m1 * mf * c22 - m1 * m2 * c2f - m2 * mf * c12) + (c22 * c1f - c12 * c2f);
        let sigma_num =
            n * (m1 * m1 * c2f + m2 * mf * c11 - m1 * m2 * c1f - m1 * mf * c12) + (c11 * c2f - c12 * c1f);
        Self {
            s11: n * m1 * m1 + c11,
            s22: n * m2 * m2 + c22,
            det,
            alpha_num,
            sigma_num,
            var1: c11 / n,
            var2: c22 / n,
        }
    }

    /// Condition number of the normal matrix after scaling it to a unit
    /// diagonal: `(1 + |c|) / (1 − |c|)` with `c` the regressor cosine.
    fn condition_number(&self) -> f64 {
        if self.s11 <= 0.0 || self.s22 <= 0.0 {
            return f64::INFINITY;
        }
        let gap = self.det / (self.s11 * self.s22);
        if gap <= 0.0 {
            return f64::INFINITY;
        }
        let c = (1.0 - gap).max(0.0).sqrt();
        (1.0 + c) * (1.0 + c) / gap
    }

    fn is_singular(&self, n: usize, cfg: &EstimatorConfig) -> bool {
        if self.s11 <= 0.0 || self.s22 <= 0.0 || self.det <= 0.0 {
            return true;
        }
        if self.var1 < cfg.min_regressor_variance && self.var2 < cfg.min_regressor_variance {
            return true;
        }
        self.det / (self.s11 * self.s22) <= 16.0 * n as f64 * f64::EPSILON
    }
}

/// Fits `α, σ` on one window with default configuration.
pub fn ols_fit(f: &TimeSeries, f_ref: &TimeSeries, p: &TimeSeries, w: Window) -> Result<DroopEstimate> {
    ols_fit_with(f, f_ref, p, w, &EstimatorConfig::default())
}

pub fn ols_fit_with(
    f: &TimeSeries,
    f_ref: &TimeSeries,
    p: &TimeSeries,
    w: Window,
    cfg: &EstimatorConfig,
) -> Result<DroopEstimate> {
    check_inputs(f, f_ref, p, w)?;
    let fw = &f.values()[w.range()];
    let rw = &f_ref.values()[w.range()];
    let pw = &p.values()[w.range()];

    let sys = NormalSystem::assemble(fw, rw, pw);
    let condition_number = sys.condition_number();
    let ill_conditioned = condition_number > cfg.condition_threshold;
    if ill_conditioned && sys.is_singular(w.length, cfg) {
        return Err(Error::CollinearRegressors {
            start: w.start,
            condition_number,
        });
    }

    let alpha = sys.alpha_num / sys.det;
    let mut sigma = sys.sigma_num / sys.det;

    // Snap a power coefficient whose contribution is below rounding level.
    let rms = |xs: &[f64]| (xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64).sqrt();
    if sigma.abs() * rms(pw) <= 1e-12 * rms(fw) {
        sigma = 0.0;
    }
    let beta = if sigma == 0.0 {
        BiasValue::mw_per_hz(f64::INFINITY)
    } else {
        BiasValue::mw_per_hz(1.0 / sigma)
    };

    let ssr = sum_squared_residuals(fw, rw, pw, alpha, sigma);
    let mf = mean(fw);
    let sst: f64 = fw.iter().map(|v| (v - mf) * (v - mf)).sum();
    let r_squared = if sst > 0.0 {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    } else if ssr <= f64::EPSILON * fw.iter().map(|v| v * v).sum::<f64>() {
        1.0
    } else {
        0.0
    };

    Ok(DroopEstimate {
        minute_index: w.end() - 1,
        alpha,
        sigma,
        beta,
        window: w,
        r_squared,
        condition_number,
        residual_rms: (ssr / w.length as f64).sqrt(),
        ill_conditioned,
    })
}

/// One estimate per stride position, each fitted on the trailing window
/// ending at that minute. The first estimate ends at minute
/// `window_minutes − 1`.
///
/// Ill-conditioned windows reuse the parameters of the most recent
/// well-conditioned window and keep their own diagnostics with
/// `ill_conditioned` set. Before any well-conditioned window exists, a
/// degenerate window reports NaN parameters.
pub fn rolling_estimate(
    f: &TimeSeries,
    f_ref: &TimeSeries,
    p: &TimeSeries,
    cfg: &EstimatorConfig,
) -> Result<Vec<DroopEstimate>> {
    cfg.validate()?;
    f.check_aligned(f_ref)?;
    f.check_aligned(p)?;
    if f.len() < cfg.window_minutes {
        return Err(Error::SeriesTooShort {
            needed: cfg.window_minutes,
            got: f.len(),
        });
    }

    let mut out = Vec::with_capacity((f.len() - cfg.window_minutes) / cfg.stride_minutes + 1);
    let mut last_good: Option<(f64, f64, BiasValue)> = None;
    for end in (cfg.window_minutes - 1..f.len()).step_by(cfg.stride_minutes) {
        let w = Window::trailing(end, cfg.window_minutes);
        let est = match ols_fit_with(f, f_ref, p, w, cfg) {
            Ok(est) => est,
            Err(Error::CollinearRegressors {
                condition_number, ..
            }) => DroopEstimate {
                minute_index: end,
                alpha: f64::NAN,
                sigma: f64::NAN,
                beta: BiasValue::mw_per_hz(f64::NAN),
                window: w,
                r_squared: 0.0,
                condition_number,
                residual_rms: f64::NAN,
                ill_conditioned: true,
            },
            Err(e) => return Err(e),
        };
        let est = if est.ill_conditioned {
            match last_good {
                Some((alpha, sigma, beta)) => DroopEstimate {
                    alpha,
                    sigma,
                    beta,
                    ..est
                },
                None => est,
            }
        } else {
            last_good = Some((est.alpha, est.sigma, est.beta));
            est
        };
        out.push(est);
    }
    Ok(out)
}

/// Per-minute bias in MW/Hz from a set of rolling estimates.
///
/// Each minute takes the latest estimate at or before it. Minutes before
/// the first estimate, and estimates without a finite positive bias, fall
/// back to `fallback`.
pub fn beta_series(
    estimates: &[DroopEstimate],
    like: &TimeSeries,
    fallback: BiasValue,
) -> Result<TimeSeries> {
    let fallback = fallback.to_mw_per_hz()?;
    let mut values = vec![fallback; like.len()];
    let mut current = fallback;
    let mut next = estimates.iter().peekable();
    for (k, v) in values.iter_mut().enumerate() {
        while let Some(est) = next.next_if(|e| e.minute_index <= k) {
            let b = est.beta.to_mw_per_hz()?;
            current = if b.is_finite() && b > 0.0 { b } else { fallback };
        }
        *v = current;
    }
    like.with_values(values, Unit::MwPerHz)
}
