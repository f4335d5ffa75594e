use pem_machine::MachineError;

/// Errors shared by every algorithm running on the simulator.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PemError {
    #[error(transparent)]
    Machine(#[from] MachineError),
    #[error("empty input")]
    Empty,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("gave up after {retries} resampling attempts: {detail}")]
    RetryCap { retries: u32, detail: String },
    #[error("{0}")]
    Failed(String),
}

pub type Result<T, E = PemError> = std::result::Result<T, E>;
