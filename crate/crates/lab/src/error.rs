use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] kcip_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type LabResult<T> = std::result::Result<T, LabError>;

impl LabError {
    pub fn config(msg: impl Into<String>) -> Self {
        LabError::Config(msg.into())
    }

    /// 0 success, 2 config, 3 size cap, 4 numeric, 1 anything else.
    pub fn exit_code(&self) -> u8 {
        use kcip_core::Error as E;
        match self {
            LabError::Config(_) => 2,
            LabError::Core(E::InvalidParameter(_) | E::InvalidState(_)) => 2,
            LabError::Core(E::SizeLimit { .. }) => 3,
            LabError::Core(E::Numeric { .. } | E::Horizon { .. }) => 4,
            LabError::Io(_) | LabError::Csv(_) => 1,
        }
    }
}
