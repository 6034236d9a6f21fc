use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {re} + {im}i is not in the upper half plane")]
    NotInUpperHalfPlane { re: f64, im: f64 },

    #[error("matrix determinant {det} is not 1")]
    NotUnimodular { det: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature did not converge: {0}")]
    Convergence(String),

    #[error("spectral amplification {amplification:e} exceeds limit at t = {t}")]
    AmplificationOverflow { t: f64, amplification: f64 },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("density is negative (min {min:e}): {context}")]
    Negative { min: f64, context: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures that come from the numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Convergence(_) | Error::AmplificationOverflow { .. } | Error::Negative { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
