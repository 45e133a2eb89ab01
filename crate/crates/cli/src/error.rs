use std::path::PathBuf;

use hardlinrl_core::agents::OracleError;
use hardlinrl_core::cnf::CnfError;
use hardlinrl_core::gapsat::GapError;
use hardlinrl_core::mdp::MdpError;
use thiserror::Error;

/// Exit status of the binary.
pub mod exit {
    pub const OK: u8 = 0;
    pub const VERIFICATION_FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const REFUSED: u8 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("refused: {0}")]
    Refused(String),
    #[error(transparent)]
    Other(#[from] anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Refused(_) => exit::REFUSED,
            _ => exit::USAGE,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<CnfError> for CliError {
    fn from(e: CnfError) -> Self {
        match e {
            CnfError::TooManyVariables { .. } | CnfError::BudgetExceeded { .. } => CliError::Refused(e.to_string()),
            e => CliError::Usage(e.to_string()),
        }
    }
}

impl From<GapError> for CliError {
    fn from(e: GapError) -> Self {
        match e {
            GapError::Cnf(c) => c.into(),
            e => CliError::Usage(e.to_string()),
        }
    }
}

impl From<MdpError> for CliError {
    fn from(e: MdpError) -> Self {
        match e {
            MdpError::Refused(msg) => CliError::Refused(msg),
            MdpError::Cnf(c) => c.into(),
            MdpError::Poly(p) => CliError::Refused(p.to_string()),
            e => CliError::Usage(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Mdp(m) => m.into(),
            OracleError::Refused(msg) => CliError::Refused(msg),
            OracleError::BudgetExhausted(_) => CliError::Refused(e.to_string()),
            e => CliError::Other(anyhow::anyhow!(e)),
        }
    }
}

impl From<hardlinrl_core::reward::RewardError> for CliError {
    fn from(e: hardlinrl_core::reward::RewardError) -> Self {
        CliError::Usage(e.to_string())
    }
}
