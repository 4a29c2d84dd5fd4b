use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A plan document could not be turned into a [`PlanSample`](crate::plan::PlanSample).
    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    /// Feature vectors or models built under different schemas were mixed.
    #[error("schema error: {0}")]
    Schema(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// An argument was outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("duplicate query id `{0}`")]
    Duplicate(String),

    /// Failure while fitting or predicting one cross-validation fold.
    #[error("fold {fold}: {source}")]
    Eval {
        fold: usize,
        #[source]
        source: Box<Error>,
    },

    /// A corpus or model file was unreadable, truncated, or of the wrong version.
    #[error("{location}: {message}")]
    Format { location: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn parse(path: impl fmt::Display, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn format(location: impl fmt::Display, message: impl fmt::Display) -> Self {
        Error::Format {
            location: location.to_string(),
            message: message.to_string(),
        }
    }
}
