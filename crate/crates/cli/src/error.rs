use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Numerical(spinsq::Error),

    #[error("{0}")]
    Regime(String),

    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl From<spinsq::Error> for CliError {
    fn from(e: spinsq::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e)
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl CliError {
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
            CliError::Regime(_) => "regime",
            CliError::Io(_) => "io",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Regime(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}
