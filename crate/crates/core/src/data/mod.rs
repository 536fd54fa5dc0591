//! Mixed-type run tables: schema, CSV ingestion, splitting and numeric encoding.

mod csv_io;
mod encode;
mod schema;
mod split;
mod table;

pub use csv_io::{load_csv, read_csv, write_csv};
pub use encode::{encode, EncodedBlock, EncodedMatrix, Encoder, UnknownCategory};
pub use schema::{ColumnKind, ColumnSpec, Role, Schema};
pub use split::{split, split_indices, Split};
pub use table::{ColumnData, RunTable};

use thiserror::Error;

/// Errors raised while building, reading or transforming a [`RunTable`].
///
/// Row numbers are 1-based positions in the data section of the CSV (the
/// header is not counted).
#[derive(Debug, Error)]
pub enum DataError {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("column `{0}` is already present")]
    ColumnAlreadyPresent(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("row {row}, column `{column}`: value does not match the declared kind")]
    TypeMismatch { row: usize, column: String },
    #[error("row {row}, column `{column}`: value is not finite")]
    NonFiniteValue { row: usize, column: String },
    #[error("row {row}, column `{column}`: missing value")]
    MissingValue { row: usize, column: String },
    #[error("vector column `{0}` does not have its declared length")]
    BadVectorLength(String),
    #[error("table has no data rows")]
    MissingRows,
    #[error("column `{column}` is {actual}, expected {expected}")]
    WrongKind {
        column: String,
        expected: &'static str,
        actual: &'static str,
    },
    #[error("class `{0}` has fewer than 2 members; stratified split impossible")]
    ClassTooSmall(String),
    #[error("test ratio {0} is outside (0, 1)")]
    InvalidRatio(f64),
    #[error("split of {n} rows at ratio {ratio} leaves an empty partition")]
    EmptyPartition { n: usize, ratio: f64 },
    #[error("row index {index} out of range for table of {n} rows")]
    RowOutOfRange { index: usize, n: usize },
    #[error("expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
