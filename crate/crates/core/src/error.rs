use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is invalid. `field` names the offending entry.
    #[error("invalid configuration `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    /// Non-finite objective, gradient or payoff. `date` is the exercise date
    /// being fitted, when there is one.
    #[error("numeric fault{}: {message}", date.map(|d| format!(" at date {d}")).unwrap_or_default())]
    Numeric { date: Option<usize>, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub fn argument(message: impl Into<String>) -> Self {
        Error::Argument(message.into())
    }

    pub fn numeric(date: Option<usize>, message: impl Into<String>) -> Self {
        Error::Numeric {
            date,
            message: message.into(),
        }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Argument(_) | Error::Json(_) => 2,
            Error::Numeric { .. } => 3,
            Error::Io(_) | Error::Csv(_) => 1,
        }
    }
}
