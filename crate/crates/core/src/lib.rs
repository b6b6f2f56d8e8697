//! Time-varying frequency bias estimation for balancing areas.
//!
//! The crate fits the area droop line `f = α·f_ref − σ·P` to minute
//! telemetry over rolling windows, giving a bias `β = 1/σ` per minute. A
//! governor-turbine-generator simulator produces telemetry with known
//! parameters for validation, and the accounting modules turn a bias into
//! ACE components, load-deviation estimates, inadvertent interchange and
//! regulation reserve envelopes.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ace;
pub mod area;
pub mod error;
pub mod estimator;
pub mod gtg;
pub mod reserve;
pub mod simulate;
pub mod timeseries;

pub use ace::{
    ace_f_from_bias, compose_ace, estimate_load_deviation, iee_compare, iee_compare_deviation,
    iee_hourly, interchange_deviation, AceRecord, BiasInput, BiasOrigin, IeeRecord,
    LoadDeviationSeries,
};
pub use area::{aggregate_area, AreaDroop, MemberDroop};
pub use error::{Error, Result};
pub use estimator::{
    beta_from_sigma, beta_series, objective_value, ols_fit, ols_fit_with, rolling_estimate, DroopEstimate,
    EstimatorConfig,
};
pub use gtg::{analytic_droop, step_gtg, GtgParams, GtgState, PlantDroop};
pub use reserve::{
    band_compliance, cost_savings, envelope_tightening, monthly_envelopes, reserve_envelope,
    BandSpec, CostModel, EnvelopeBasis, Money, MonthlyEnvelope, ReserveEnvelope, Tightening,
};
pub use simulate::{
    simulate_ba, two_area_interchange, uniform_interchange, AreaScenario, BiasSchedule, DisturbanceSpec, DroopTruth,
    InterchangeModel, LoadModel, SyntheticDataset,
};
pub use timeseries::{convert_bias, BiasValue, TimeSeries, Unit, Window};
