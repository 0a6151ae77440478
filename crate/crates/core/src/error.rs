use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (residual {residual:.3e} > {tol:.3e})")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("matrix is not anti-Hermitian (residual {residual:.3e} > {tol:.3e})")]
    NotAntiHermitian { residual: f64, tol: f64 },

    #[error("matrix is not unitary (residual {residual:.3e} > {tol:.3e})")]
    NotUnitary { residual: f64, tol: f64 },

    #[error("frame columns are not orthonormal (residual {residual:.3e})")]
    NotOrthonormal { residual: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("singular value decomposition did not converge")]
    SvdFailure,

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("time {t} lies outside the sampled interval [{start}, {end}]")]
    TimeOutOfRange { t: f64, start: f64, end: f64 },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("section precondition failed: {0}")]
    SectionPrecondition(String),

    #[error("in-phase condition violated: smallest eigenvalue of O(0,tau) is {margin:.3e}")]
    InPhaseViolation { margin: f64 },

    #[error("gauge transformation is not closed: ||V(tau) - V(0)|| = {residual:.3e}")]
    GaugeNotClosed { residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
