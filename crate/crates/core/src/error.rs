use thiserror::Error;

/// Errors raised by the exact engine and the Monte Carlo harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A constructed object would violate one of its invariants.
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    /// The exact product space would need more atoms than allowed.
    #[error("atom budget exceeded: model needs {required} atoms, budget is {budget}")]
    AtomBudget { required: u128, budget: usize },

    /// A search hit its iteration cap before finding a witness.
    #[error("search cap of {cap} reached: {context}")]
    SearchCap { cap: u64, context: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Error {
    Error::Invalid {
        what,
        reason: reason.into(),
    }
}
