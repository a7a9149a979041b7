//! Instance files and errors shared by the `bochner` binary.

use std::path::PathBuf;

pub mod instance;

pub use instance::{Instance, InstanceFile, SetFile, SetKind, SpaceFile};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {0}: {1}")]
    Read(PathBuf, std::io::Error),
    #[error("cannot parse {0}: {1}")]
    Parse(PathBuf, serde_json::Error),
    #[error("cannot write {0}: {1}")]
    Write(PathBuf, std::io::Error),
    #[error("invalid instance: {0}")]
    Invalid(&'static str),
    #[error("invalid instance: {0}")]
    Core(#[from] bochner_core::Error),
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}
