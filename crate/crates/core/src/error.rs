use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A formula was evaluated outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A user-supplied parameter or configuration field is invalid.
    #[error("invalid `{field}`: {message}")]
    Validation { field: String, message: String },

    /// A Fock index exceeded the supported or tabulated range.
    #[error("index {index} out of range (max {max}) for {what}")]
    Range {
        what: &'static str,
        index: usize,
        max: usize,
    },

    /// An iterative check failed to reach its tolerance.
    #[error("convergence failure in {what}: achieved {achieved:.3e}, tolerance {tolerance:.3e}")]
    Convergence {
        what: String,
        achieved: f64,
        tolerance: f64,
    },

    /// Lab-frame energies need the absolute cavity frequency.
    #[error("lab-frame energy requested but omega_c is not set")]
    MissingCavityFrequency,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::Validation { .. }
            | Error::Range { .. }
            | Error::MissingCavityFrequency => 2,
            Error::Convergence { .. } => 3,
            Error::Io(_) | Error::Json(_) | Error::Csv(_) => 1,
        }
    }

    /// Short machine-readable category name.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Validation { .. } => "validation",
            Error::Range { .. } => "range",
            Error::Convergence { .. } => "convergence",
            Error::MissingCavityFrequency => "missing_omega_c",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
