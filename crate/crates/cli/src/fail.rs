use serde::Serialize;

/// An error with a stable machine-readable code; always exit status 1.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub code: String,
    pub message: String,
}

impl Failure {
    pub fn new(code: &str, message: impl Into<String>) -> Self {
        Self {
            code: code.to_string(),
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self::new("config", message)
    }

    pub fn param(message: impl Into<String>) -> Self {
        Self::new("invalid_parameter", message)
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self::new("io", message)
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new("usage", message)
    }
}

impl From<seqclass::Error> for Failure {
    fn from(e: seqclass::Error) -> Self {
        Self::new(e.code(), e.to_string())
    }
}
