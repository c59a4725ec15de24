use thiserror::Error;

/// Everything that can go wrong while building or evaluating a coincidence problem.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid glide data: {0}")]
    InvalidGlide(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("induced homomorphism does not respect the group relations: {0}")]
    InvalidHom(String),

    #[error("lift is not equivariant: {0}")]
    NotEquivariant(String),

    #[error("unsupported group pair: {0}")]
    UnsupportedGroupPair(String),

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("singular pair: {0}; run `regularize` (or pass --regularize) first")]
    SingularPair(String),

    #[error("coincidence point is not regular: {0}")]
    NonRegularPoint(String),

    #[error("numeric solver tolerance not met: {0}")]
    ToleranceNotMet(String),

    #[error("regularization failed after {attempts} attempts")]
    RegularizationFailed { attempts: usize },

    #[error("homotopy is not admissible: {0}")]
    NotAdmissible(String),

    #[error("map is not orientation true: {0}")]
    NotOrientationTrue(String),

    #[error("singular jacobian: {0}")]
    SingularJacobian(String),

    #[error("record is not regular")]
    NotRegular,

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by the input description rather than by the computation.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Config { .. }
                | Error::InvalidGlide(_)
                | Error::DimensionMismatch(_)
                | Error::InvalidHom(_)
                | Error::NotEquivariant(_)
                | Error::InvalidRegion(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
