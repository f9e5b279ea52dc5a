use chiral_core::cnot::GateError;
use chiral_core::coupling::CouplingError;
use chiral_core::quantum::QuantumError;
use chiral_core::scattering::ScatteringError;
use chiral_core::spectroscopy::SpectroscopyError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input data: {0}")]
    Data(String),
    #[error("config: {0}")]
    Config(String),
    #[error("numerical: {0}")]
    NonConvergence(String),
    #[error("io: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Data(_) => 2,
            CliError::Config(_) => 3,
            CliError::NonConvergence(_) => 4,
            CliError::Io(_) => 1,
        }
    }
}

pub fn config(msg: impl std::fmt::Display) -> CliError {
    CliError::Config(msg.to_string())
}

impl From<CouplingError> for CliError {
    fn from(e: CouplingError) -> Self {
        use CouplingError::*;
        match e {
            OutsideGrid { .. } | DipoleNorm(_) | InvalidRate { .. } | TableSize { .. } => config(e),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<ScatteringError> for CliError {
    fn from(e: ScatteringError) -> Self {
        match e {
            ScatteringError::NonConvergence { .. } => CliError::NonConvergence(e.to_string()),
            _ => config(e),
        }
    }
}

impl From<QuantumError> for CliError {
    fn from(e: QuantumError) -> Self {
        config(e)
    }
}

impl From<GateError> for CliError {
    fn from(e: GateError) -> Self {
        match e {
            GateError::NormViolation(_) | GateError::EntangledSpin(_) => {
                CliError::NonConvergence(e.to_string())
            }
            GateError::Scattering(s) => s.into(),
            _ => config(e),
        }
    }
}

impl From<SpectroscopyError> for CliError {
    fn from(e: SpectroscopyError) -> Self {
        use SpectroscopyError::*;
        match e {
            NonConvergence(_) | DegenerateInit(_) | ZeroDenominator => {
                CliError::NonConvergence(e.to_string())
            }
            EmptyStream | InsufficientRange(_) | Parse { .. } => CliError::Data(e.to_string()),
            _ => config(e),
        }
    }
}
