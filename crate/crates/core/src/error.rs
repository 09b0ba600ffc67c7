use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("triple #{position} ({row}, {col}) is outside a {num_rows}x{num_cols} matrix")]
    IndexOutOfBounds {
        position: usize,
        row: usize,
        col: usize,
        num_rows: usize,
        num_cols: usize,
    },

    #[error("invalid CSR structure: {0}")]
    InvalidCsr(String),

    #[error("dense matrix data has length {len}, expected {rows}x{cols}")]
    InvalidDense { rows: usize, cols: usize, len: usize },

    #[error("matrix has no rows")]
    NoRows,

    #[error("dimension mismatch: A is {a_rows}x{a_cols}, X is {x_rows}x{x_cols}")]
    DimensionMismatch {
        a_rows: usize,
        a_cols: usize,
        x_rows: usize,
        x_cols: usize,
    },

    #[error("invalid lane chunk: {0}")]
    InvalidChunk(String),

    #[error("column-group width must be 1, 2 or 4, got {0}")]
    InvalidGroupWidth(usize),

    #[error("invalid kernel configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid selector thresholds: {0}")]
    InvalidThresholds(String),

    #[error("invalid R-MAT parameters: {0}")]
    InvalidRmatParams(String),

    #[error("matrix market, line {line}: {message}")]
    MatrixMarket { line: usize, message: String },

    #[error("no benchmark records")]
    EmptyRecords,

    #[error("missing benchmark cell: matrix {matrix}, n={n}, kernel {kernel}")]
    MissingCell { matrix: String, n: usize, kernel: String },

    #[error("unknown kernel name {0:?}")]
    UnknownKernel(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
