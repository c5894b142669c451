use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// `divisor` does not divide `dividend`.
    #[error("{divisor_name}={divisor} does not divide {dividend_name}={dividend}")]
    Divisibility {
        divisor_name: &'static str,
        divisor: usize,
        dividend_name: &'static str,
        dividend: usize,
    },

    #[error("batch_size={batch_size} does not exceed stride={stride}; shingled batches would not overlap")]
    NoOverlap { batch_size: usize, stride: usize },

    #[error("incomplete assignment: batches {missing:?} are not hosted by any worker")]
    IncompleteAssignment { missing: Vec<usize> },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
