use thiserror::Error;

use crate::model::JobId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid job {id}: {reason}")]
    InvalidJob { id: JobId, reason: String },

    /// Some jobs need a speed above the fastest available level.
    #[error("infeasible: jobs {jobs:?} require a speed above {max_speed}")]
    Infeasible { jobs: Vec<JobId>, max_speed: String },

    #[error("internal consistency error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
