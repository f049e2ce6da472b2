use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown builtin family `{0}`")]
    UnknownBuiltin(String),

    #[error("malformed potential spec: {0}")]
    Spec(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("{module}: step size underflow at x = {x:.6e} (stiff region; pass breakpoints)")]
    Stiffness { module: &'static str, x: f64 },

    #[error("origin series does not converge at x0 = {x0:.3e}; shrink x0")]
    SeriesDivergence { x0: f64 },

    #[error("{module}: degenerate coupling system (condition number {condition:.3e})")]
    DegenerateCoupling { module: &'static str, condition: f64 },

    #[error("{module}: near-eigenvalue, Wronskian {wronskian:.3e}")]
    NearEigenvalue { module: &'static str, wronskian: f64 },

    #[error("{module}: {message}")]
    Numerical { module: &'static str, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by bad user input rather than by a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::UnknownBuiltin(_)
                | Error::Spec(_)
                | Error::Contract(_)
                | Error::Json(_)
        )
    }
}
