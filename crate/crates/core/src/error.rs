use thiserror::Error;

/// Errors raised by the simulation and analysis pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid spec field `{field}`: {reason}")]
    InvalidSpec { field: &'static str, reason: String },

    #[error("degenerate spec: {0}")]
    DegenerateSpec(String),

    #[error(
        "support half-width L = {halfwidth} leaves tail mass {tail_mass:e} above tolerance {tolerance:e}; \
         required L >= {required_halfwidth}"
    )]
    Truncation {
        halfwidth: f64,
        tail_mass: f64,
        tolerance: f64,
        required_halfwidth: f64,
    },

    #[error("argument {value} outside domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("event {seq} at x = {x} lies outside the binned region [{lower}, {upper}]")]
    OuterRegionViolation {
        seq: u64,
        x: f64,
        lower: f64,
        upper: f64,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    /// True for errors caused by bad configuration rather than bad data.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidSpec { .. }
                | Error::DegenerateSpec(_)
                | Error::Truncation { .. }
                | Error::Domain { .. }
                | Error::InvalidParameter { .. }
        )
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
