use std::path::PathBuf;

use rdnet_core::diagnostics::DiagError;
use rdnet_core::dsl::ParseError;
use rdnet_core::ladder::LadderError;
use rdnet_core::pde::PdeError;
use rdnet_core::structural::StructuralError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {msg}", path.display())]
    Config { path: PathBuf, msg: String },
    #[error("{}:{}: {source}", path.display(), source.line())]
    Network {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("structural analysis failed: {0}")]
    Structural(#[from] StructuralError),
    #[error("simulation failed: {0}")]
    Pde(#[from] PdeError),
    #[error("diagnostics failed: {0}")]
    Diag(#[from] DiagError),
    #[error(transparent)]
    Ladder(#[from] LadderError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}
