use std::io;
use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// A record in an input file could not be parsed. `row` is the 1-based
    /// data row (header excluded) for CSV, or the 1-based line for JSON-lines.
    #[error("{origin}: invalid {field} at row {row}: {message}")]
    Row {
        origin: String,
        row: usize,
        field: String,
        message: String,
    },

    #[error("{origin}: duplicate id {id:?} at row {row}")]
    DuplicateId { origin: String, id: String, row: usize },

    #[error("unknown hazard label {0:?} (known labels: landslide, fire)")]
    UnknownHazard(String),

    #[error("document {id} dated {date} lies outside the series range {start}..{end}")]
    OutOfRange {
        id: String,
        date: NaiveDate,
        start: NaiveDate,
        end: NaiveDate,
    },

    #[error("gazetteer: {0}")]
    Gazetteer(String),

    #[error("{origin}: unmapped registry type {label:?} at row {row}; add it to the type map (hazard or \"ignore\")")]
    UnmappedType {
        origin: String,
        label: String,
        row: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("config: {0}")]
    Config(String),

    #[error("write failed: {0}")]
    Write(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// Two pieces of derived data disagree with each other, e.g. an event day
    /// in the count series with no backing documents.
    #[error("inconsistency: {0}")]
    Inconsistency(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn row(
        origin: &str,
        row: usize,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Row {
            origin: origin.to_string(),
            row,
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// Process exit status: 2 for input or configuration problems, 3 when an
    /// internal invariant was violated.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Inconsistency(_) => 3,
            Error::Stage { source, .. } => source.exit_code(),
            _ => 2,
        }
    }
}
