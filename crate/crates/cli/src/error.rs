use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the pipeline. Each class has its own exit code; see
/// [`CliError::exit_code`].
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("missing column {0:?}")]
    MissingColumn(String),
    #[error("bad timestamp at row {row}: {detail}")]
    BadTimestamp { row: usize, detail: String },
    #[error("non-finite or unparsable value at row {row}, column {column:?}")]
    NonFinite { row: usize, column: String },
    #[error("gap in input during hour {0}; rerun with --gap-policy drop_hour to skip it")]
    GapRejected(usize),
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] freqbias_core::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub mod exit {
    pub const INTERNAL: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const MISSING_COLUMN: i32 = 4;
    pub const BAD_TIMESTAMP: i32 = 5;
    pub const NON_FINITE: i32 = 6;
    pub const GAP_REJECTED: i32 = 7;
    pub const CONFIG: i32 = 8;
    pub const SERIES: i32 = 9;
    pub const SIMULATION: i32 = 10;
    pub const ESTIMATION: i32 = 11;
    pub const ACCOUNTING: i32 = 12;
    pub const CSV: i32 = 13;
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use freqbias_core::Error as E;
        match self {
            CliError::Io { .. } => exit::IO,
            CliError::Csv(_) => exit::CSV,
            CliError::MissingColumn(_) => exit::MISSING_COLUMN,
            CliError::BadTimestamp { .. } => exit::BAD_TIMESTAMP,
            CliError::NonFinite { .. } => exit::NON_FINITE,
            CliError::GapRejected(_) => exit::GAP_REJECTED,
            CliError::Config(_) => exit::CONFIG,
            CliError::Core(e) => match e {
                E::NonFiniteValue(_)
                | E::EmptySeries
                | E::NonPositivePeriod(_)
                | E::ShapeMismatch(_)
                | E::UnitMismatch { .. }
                | E::PeriodMismatch { .. }
                | E::PartialHour(_)
                | E::OutOfBounds { .. }
                | E::UnsupportedUnit(_) => exit::SERIES,
                E::StepTooLarge { .. }
                | E::NonFiniteState
                | E::DegenerateParams(_)
                | E::EmptyArea
                | E::InvalidSpec(_)
                | E::ScheduleMismatch(_) => exit::SIMULATION,
                E::CollinearRegressors { .. }
                | E::SeriesTooShort { .. }
                | E::ZeroSigma
                | E::InvalidConfig(_) => exit::ESTIMATION,
                E::BadQuantile(_) | E::NegativeInput(_) => exit::ACCOUNTING,
            },
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io("<csv stream>", io),
            other => CliError::Csv(format!("{other:?}")),
        }
    }
}
