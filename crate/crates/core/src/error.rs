use thiserror::Error;

/// Failures of the spectral layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SpectralError {
    #[error("grid size {0} must be a power of two and at least 8")]
    InvalidSize(usize),
    #[error("FFT engine has length {found}, grid needs {expected}")]
    EngineLength { expected: usize, found: usize },
    #[error("symbol vanishes on mode ({p}, {q}) excited by the right-hand side")]
    SingularMode { p: i64, q: i64 },
}

/// Every failure the library reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("invalid model: {0}")]
    InvalidModel(&'static str),
    #[error("Newton iteration diverged after {iterations} iterations (residual {residual:e})")]
    NonlinearDivergence { iterations: usize, residual: f64 },
    #[error("conjugate gradients did not converge in {iterations} iterations")]
    MaxIterExceeded { iterations: usize },
    #[error("operator is not positive definite (curvature {0:e})")]
    IndefiniteOperator(f64),
    #[error("multistep scheme called without history")]
    MissingHistory,
    #[error("SAV radicand E1 + C0 = {0:e} is not positive")]
    NegativeRadicand(f64),
    #[error("SAV scheme called without an auxiliary scalar")]
    MissingAuxiliary,
    #[error("step size {0:e} fell below the underflow limit")]
    StepUnderflow(f64),
    #[error("potential is negative on (-well, well); reaction is not bistable")]
    NotBistable,
    #[error("Eyre balance parameter {0} is not below 1")]
    BalanceDiverged(f64),
    #[error("no interface found along the ray")]
    NoInterface,
    #[error("centre value never changes sign")]
    NoCrossing,
    #[error("non-finite value encountered")]
    NonFinite,
}

impl Error {
    /// Failures caused by the numerics rather than by invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonlinearDivergence { .. }
                | Error::MaxIterExceeded { .. }
                | Error::IndefiniteOperator(_)
                | Error::StepUnderflow(_)
                | Error::NegativeRadicand(_)
                | Error::BalanceDiverged(_)
                | Error::NoInterface
                | Error::NoCrossing
                | Error::NonFinite
        )
    }
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
