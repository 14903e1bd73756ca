use thiserror::Error;

use crate::compactline::ExtReal;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A precondition on the inputs does not hold.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Adaptive quadrature did not reach its tolerance.
    #[error("integration failed at node {node} (t = {t}): estimate {value:e} +- {abs_error:e}")]
    Integration {
        node: usize,
        t: ExtReal,
        value: f64,
        abs_error: f64,
    },

    #[error("quadrature: {0}")]
    Quadrature(#[from] crate::quadrature::QuadError),

    /// An ODE trajectory left the region where the right-hand side is finite.
    #[error("blow-up detected at t = {t}")]
    BlowUp { t: f64 },

    /// The requested feature needs data the caller did not supply.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("undetermined: {0}")]
    Undetermined(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}
