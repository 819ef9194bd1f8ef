use thiserror::Error;

/// Failure modes shared by every module of the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix must be square and non-empty, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("input contains NaN or infinite entries")]
    NonFinite,
    #[error("input is not Hermitian (defect {defect:e})")]
    NonHermitianInput { defect: f64 },
    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("spectrum is degenerate (smallest eigenvalue gap {gap:e})")]
    DegenerateSpectrum { gap: f64 },
    #[error("matrix is not diagonalizable (eigenvector condition {condition:e})")]
    NotDiagonalizable { condition: f64 },
    #[error("spectrum is not real (largest imaginary part {max_imag:e}); no positive metric exists")]
    ComplexSpectrum { max_imag: f64 },
    #[error("metric weight {index} is not positive ({value})")]
    NonpositiveWeight { index: usize, value: f64 },
    #[error("step size underflow at t = {t} (h = {step:e})")]
    StepSizeUnderflow { t: f64, step: f64 },
    #[error("metric is singular")]
    SingularMetric,
    #[error("Hamiltonian is not pseudo-Hermitian (w0 = {w0:e}, v.w = {v_dot_w:e})")]
    NotPseudoHermitian { w0: f64, v_dot_w: f64 },
    #[error("v(t)^2 = {v_squared} does not exceed w^2 = {w_squared} at t = {t}")]
    RealSpectrumViolated { t: f64, v_squared: f64, w_squared: f64 },
    #[error("Moller operator did not converge: doubling the horizon changed it by {change:e}")]
    NoConvergence { change: f64 },
    #[error("time {t} outside the valid range [{lower}, {upper}]")]
    OutOfRange { t: f64, lower: f64, upper: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotSquare { .. } => "NotSquare",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NonFinite => "NonFinite",
            Error::NonHermitianInput { .. } => "NonHermitianInput",
            Error::NotPositive { .. } => "NotPositive",
            Error::DegenerateSpectrum { .. } => "DegenerateSpectrum",
            Error::NotDiagonalizable { .. } => "NotDiagonalizable",
            Error::ComplexSpectrum { .. } => "ComplexSpectrum",
            Error::NonpositiveWeight { .. } => "NonpositiveWeight",
            Error::StepSizeUnderflow { .. } => "StepSizeUnderflow",
            Error::SingularMetric => "SingularMetric",
            Error::NotPseudoHermitian { .. } => "NotPseudoHermitian",
            Error::RealSpectrumViolated { .. } => "RealSpectrumViolated",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::InvalidParameter(_) => "InvalidParameter",
        }
    }

    /// The model itself admits no positive metric, as opposed to a numerical
    /// or input failure.
    pub fn is_spectral(&self) -> bool {
        matches!(
            self,
            Error::ComplexSpectrum { .. }
                | Error::NotPseudoHermitian { .. }
                | Error::RealSpectrumViolated { .. }
        )
    }
}
