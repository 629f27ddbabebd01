use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A square matrix was required.
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },

    /// Problem size exceeds the configured cap.
    #[error("size {size} exceeds the cap of {cap}")]
    SizeCap { size: usize, cap: usize },

    /// Inconsistent lengths or totals between arguments.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A model or constructor parameter is out of range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("matrix is not unitary: max residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NotUnitary { residual: f64, tol: f64 },

    /// The operation is not defined for the given arguments.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not reach tolerance {tol:.1e}: estimate {estimate:.12e}, error bound {error_bound:.3e}")]
    Accuracy {
        estimate: f64,
        error_bound: f64,
        tol: f64,
    },

    #[error("invalid file: {0}")]
    Format(String),
}
