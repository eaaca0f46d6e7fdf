//! Subcommands of the `entail` binary.

use std::fs;
use std::path::Path;

use serde::Serialize;

use entail_core::data::DataError;
use entail_core::lang::{LangError, ParseError};
use entail_core::prover::Undecided;
use entail_core::Language;
use entail_net::NetError;

pub mod generate;
pub mod prove;
pub mod train;
pub mod zeroshot;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
    #[error("prover: {0}")]
    Undecided(String),
    #[error("numeric: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Undecided(_) => 4,
            CliError::Numeric(_) => 5,
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        match e {
            DataError::Infeasible(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<NetError> for CliError {
    fn from(e: NetError) -> Self {
        match e {
            NetError::NonFinite { .. } => CliError::Numeric(e.to_string()),
            NetError::Shape { .. } | NetError::NotPretrained => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<LangError> for CliError {
    fn from(e: LangError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<Undecided> for CliError {
    fn from(e: Undecided) -> Self {
        CliError::Undecided(e.to_string())
    }
}

pub fn load_language(path: Option<&Path>) -> Result<Language, CliError> {
    match path {
        Some(p) => Ok(Language::load(p)?),
        None => Ok(Language::default_language()),
    }
}

pub fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Everything needed to rerun a command, written as `run_config.json` into
/// its output directory.
#[derive(Debug, Serialize)]
pub struct RunConfig<'a, T: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub args: &'a T,
}

pub fn write_run_config<T: Serialize>(dir: &Path, command: &str, args: &T) -> Result<(), CliError> {
    let config = RunConfig { command, version: env!("CARGO_PKG_VERSION"), args };
    let json = serde_json::to_string_pretty(&config).map_err(|e| CliError::Data(e.to_string()))?;
    write_file(&dir.join("run_config.json"), json + "\n")
}
