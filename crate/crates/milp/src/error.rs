use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("column {column} has lower bound {lower} above upper bound {upper}")]
    InvertedBounds { column: usize, lower: f64, upper: f64 },
    #[error("binary column {0} has bounds outside [0, 1]")]
    BinaryBounds(usize),
    #[error("row {row} references unknown column {column}")]
    BadColumn { row: usize, column: usize },
    #[error("column {0} is not binary")]
    NotBinary(usize),
}
