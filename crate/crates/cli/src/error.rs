use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("{0}")]
    Core(ph_core::Error),
}

impl CliError {
    /// 1 for config, I/O and model errors, 2 for blow-up.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Core(ph_core::Error::BlowUp { .. }) => 2,
            _ => 1,
        }
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Self::Io(format!("{}: {e}", path.display()))
    }
}

impl From<ph_core::Error> for CliError {
    fn from(e: ph_core::Error) -> Self {
        Self::Core(e)
    }
}
