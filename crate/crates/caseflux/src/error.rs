use std::io;

use caseflux_core::error::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("thread pool: {0}")]
    Threads(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_CONVERGENCE: u8 = 3;

impl Error {
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Core(CoreError::Convergence { .. } | CoreError::NotAnEigenvalue { .. }) => EXIT_CONVERGENCE,
            Error::Core(_) | Error::Config(_) | Error::Threads(_) => EXIT_VALIDATION,
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => EXIT_IO,
        }
    }
}
