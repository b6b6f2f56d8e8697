use thiserror::Error;

use crate::timeseries::Unit;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value at index {0}")]
    NonFiniteValue(usize),
    #[error("series is empty")]
    EmptySeries,
    #[error("sampling period must be positive, got {0} s")]
    NonPositivePeriod(i64),
    #[error("series shapes do not match: {0}")]
    ShapeMismatch(String),
    #[error("unit mismatch: expected {expected}, found {found}")]
    UnitMismatch { expected: Unit, found: Unit },
    #[error("sampling period mismatch: expected {expected} s, found {found} s")]
    PeriodMismatch { expected: i64, found: i64 },
    #[error("series of length {0} does not span whole hours")]
    PartialHour(usize),
    #[error("window [{start}, {start}+{length}) exceeds series length {series_len}")]
    OutOfBounds {
        start: usize,
        length: usize,
        series_len: usize,
    },
    #[error("unit {0} is not a frequency-bias unit")]
    UnsupportedUnit(Unit),

    #[error("integration step {dt} s exceeds stability limit {max} s")]
    StepTooLarge { dt: f64, max: f64 },
    #[error("integrator produced a non-finite state")]
    NonFiniteState,
    #[error("degenerate plant parameters: {0}")]
    DegenerateParams(String),
    #[error("area has no member units")]
    EmptyArea,
    #[error("invalid disturbance spec: {0}")]
    InvalidSpec(String),
    #[error("interchange schedules are not aligned: {0}")]
    ScheduleMismatch(String),

    #[error("regressors are collinear within window starting at {start} (condition number {condition_number:e})")]
    CollinearRegressors { start: usize, condition_number: f64 },
    #[error("series too short: need at least {needed} samples, got {got}")]
    SeriesTooShort { needed: usize, got: usize },
    #[error("droop constant is zero; bias is undefined")]
    ZeroSigma,
    #[error("invalid estimator configuration: {0}")]
    InvalidConfig(String),

    #[error("quantile {0} outside (0.5, 1.0]")]
    BadQuantile(f64),
    #[error("negative input: {0}")]
    NegativeInput(String),
}
