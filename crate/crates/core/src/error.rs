use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error("schema: {0}")]
    Schema(String),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("column `{0}` is declared in the schema but absent from the data")]
    MissingColumn(String),

    #[error("row {row}, column `{column}`: {reason}")]
    InvalidCell { row: usize, column: String, reason: String },

    #[error("dataset needs at least {required} records, found {found}")]
    TooFewRecords { required: usize, found: usize },

    #[error("historical record {row} has no effort value")]
    MissingEffort { row: usize },

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("feature `{feature}` has no level `{level}`")]
    UnknownLevel { feature: String, level: String },

    #[error("feature `{0}` is not ordinal")]
    NotOrdinal(String),

    #[error("feature `{feature}` has zero range in the historical data but the compared values differ ({a} vs {b})")]
    DegenerateRange { feature: String, a: f64, b: f64 },

    #[error("distance is undefined: the two records share no non-missing feature")]
    UndefinedDistance,

    #[error("distance between projects {i} and {j} is undefined: they share no non-missing feature")]
    UndefinedPair { i: usize, j: usize },

    #[error("empty sample")]
    EmptySample,

    #[error("index {index} out of bounds for {len} projects")]
    IndexOutOfBounds { index: usize, len: usize },

    #[error("no candidate neighbors remain after exclusions")]
    EmptyRanking,

    #[error("k = {k} is outside 1..={available}")]
    KOutOfRange { k: usize, available: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("no defined values to aggregate for {0}")]
    EmptyInput(&'static str),
}

impl Error {
    /// True for problems with the inputs (files, schema, records, configuration)
    /// as opposed to failures during estimation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::Csv(_)
                | Error::Schema(_)
                | Error::UnknownColumn(_)
                | Error::MissingColumn(_)
                | Error::InvalidCell { .. }
                | Error::TooFewRecords { .. }
                | Error::MissingEffort { .. }
                | Error::UnknownFeature(_)
                | Error::UnknownLevel { .. }
                | Error::NotOrdinal(_)
                | Error::InvalidConfig(_)
        )
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Csv(err.to_string())
    }
}
