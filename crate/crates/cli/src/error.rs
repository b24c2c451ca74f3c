use std::path::PathBuf;

use can_coord::game::GameError;
use can_coord::nbs::BargainError;
use can_coord::schema::ScenarioFileError;
use can_coord::ModelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Input(String),
    #[error("reproduction mismatch: {0}")]
    Golden(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Input(_) => 2,
            CliError::Golden(_) => 3,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }
}

impl From<ScenarioFileError> for CliError {
    fn from(err: ScenarioFileError) -> Self {
        match err {
            ScenarioFileError::Io { path, source } => CliError::Io { path, source },
            ScenarioFileError::Schema(e) => CliError::Input(format!("invalid scenario: {e}")),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(err: ModelError) -> Self {
        CliError::Input(err.to_string())
    }
}

impl From<GameError> for CliError {
    fn from(err: GameError) -> Self {
        CliError::Input(err.to_string())
    }
}

impl From<BargainError> for CliError {
    fn from(err: BargainError) -> Self {
        CliError::Input(err.to_string())
    }
}
