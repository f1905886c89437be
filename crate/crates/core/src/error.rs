use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the sequence, checker and experiment APIs.
///
/// Every variant maps to a stable machine-readable code via [`Error::code`],
/// which the command-line front end reports alongside the message.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The input lies outside the domain of the operation (a nonreal
    /// sequence handed to a real-only checker, `c_0` on a rule without one).
    #[error("domain error: {0}")]
    Domain(String),

    /// A closed-form tail bound the operation relies on is not available
    /// (or is infinite) for the given rule.
    #[error("rule `{rule}` has no finite {what} majorant")]
    MissingMajorant { rule: String, what: &'static str },

    /// A rule specification string could not be parsed.
    #[error("invalid rule spec `{spec}`: {reason}")]
    RuleSpec { spec: String, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A theorem hypothesis required by the experiment does not hold.
    #[error("hypothesis not met: {0}")]
    Hypothesis(String),

    /// Two routes that must agree did not; this is a bug, not a finding.
    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::MissingMajorant { .. } => "missing_majorant",
            Error::RuleSpec { .. } => "rule_spec",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Hypothesis(_) => "hypothesis",
            Error::Inconsistent(_) => "inconsistent",
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
