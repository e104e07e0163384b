//! Process-level error taxonomy. Exit codes are a stable contract:
//! 0 success, 1 I/O, 2 usage, 3 estimator or data problem.

use std::fmt;

use zipfirm::firmdata::FirmDataError;
use zipfirm::riskstats::RiskError;
use zipfirm::scalefit::FitError;
use zipfirm::simonsim::SimError;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or flag combinations; exit 2.
    Usage(String),
    /// Filesystem trouble; exit 1.
    Io(String),
    /// The inputs parsed but the math or data refused them; exit 3.
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
        }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage: {msg}"),
            CliError::Io(msg) => write!(f, "i/o: {msg}"),
            CliError::Data(msg) => write!(f, "{msg}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<FitError> for CliError {
    fn from(e: FitError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<RiskError> for CliError {
    fn from(e: RiskError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidConfig(msg) => CliError::Usage(msg),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<FirmDataError> for CliError {
    fn from(e: FirmDataError) -> Self {
        match e {
            FirmDataError::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
