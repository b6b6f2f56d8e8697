//! Command-line pipeline over minute balancing-area telemetry: ingestion,
//! configuration, stage orchestration and output files.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod format;
pub mod pipeline;
pub mod plot;
pub mod telemetry;

pub use config::{BetaUnit, Overrides, RunConfig};
pub use error::{CliError, Result};
pub use pipeline::{analyze, run_stage, Analysis, Stage, Summary};
pub use telemetry::{ingest_csv, ingest_reader, GapPolicy, Telemetry};
