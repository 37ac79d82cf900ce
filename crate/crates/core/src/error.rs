use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("index {index} out of range for {len} sites")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("operands live on different grids")]
    GridMismatch,

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("qubit {qubit} out of range for a {n_qubits}-qubit circuit")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },

    #[error("matrix is not unitary (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("eigendecomposition did not converge")]
    Eigendecomposition,

    #[error("column {column} has non-positive sum {sum:e}")]
    NonPositiveColumn { column: usize, sum: f64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}
