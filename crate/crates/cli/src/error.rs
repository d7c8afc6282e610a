use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<zeno_trap::Error> for CliError {
    fn from(e: zeno_trap::Error) -> Self {
        use zeno_trap::Error as E;
        match e {
            E::InvalidParams(_) | E::Config(_) | E::Grid(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}
