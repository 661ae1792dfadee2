use thiserror::Error;

/// Errors raised by the library. The CLI maps each variant onto an exit code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("order comparison needs self-adjoint operands (point {point}, imaginary part {imag:e})")]
    Order { point: usize, imag: f64 },

    #[error("element is not positive at point {point} (value {re:e}{im:+e}i)")]
    NotPositive { point: usize, re: f64, im: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("vectors {indices:?} do not have unit inner product (worst deviation {deviation:e})")]
    NotUnit { indices: Vec<usize>, deviation: f64 },

    #[error("basis is not orthonormal (Gram residual {residual:e})")]
    Basis { residual: f64 },

    #[error("vector {vector} has a zero slice at spectrum point {point}")]
    Degenerate { vector: usize, point: usize },

    #[error("eigensolver did not converge at spectrum point {point}")]
    NoConvergence { point: usize },

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
