use thiserror::Error;

/// Errors produced by the estimation and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{name} = {value} is outside the allowed domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: String,
    },

    #[error("probabilities sum to {sum}, which deviates from 1 by more than the renormalization tolerance")]
    Normalization { sum: f64 },

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("observable is insensitive to the parameter (|derivative| = {derivative:e})")]
    InsensitiveObservable { derivative: f64 },

    #[error("requested size {requested} exceeds the capacity limit {limit}")]
    Capacity { requested: usize, limit: usize },

    #[error("truncation leakage {leakage:e} exceeds tolerance; a cutoff of at least {required_cutoff} is needed")]
    Truncation { leakage: f64, required_cutoff: usize },

    #[error("invalid unitary family: {0}")]
    InvalidFamily(String),

    #[error("likelihood is flat over the whole domain; parameter is unidentifiable")]
    Unidentifiable,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            domain: format!("[{lo}, {hi}]"),
        })
    }
}
