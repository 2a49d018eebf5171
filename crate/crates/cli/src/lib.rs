//! Configuration-driven runs of the flat-front engine.

pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use std::path::{Path, PathBuf};

pub use config::{Job, JobConfig};
pub use verify::Report;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("verification failed: {}", .0.join(", "))]
    Verification(Vec<&'static str>),
    #[error("i/o error on {path}: {msg}")]
    Io { path: PathBuf, msg: String },
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            msg: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Verification(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

impl From<flatfront_core::Error> for CliError {
    fn from(e: flatfront_core::Error) -> Self {
        use flatfront_core::Error as E;
        match e {
            E::IdentifierVanishes | E::InvalidData(_) | E::Parse { .. } => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Trace,
    Classify,
    Invariants,
    Mesh,
    Verify,
}

/// Runs one command and returns the files written.
pub fn run(cmd: Command, job: &Job, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    match cmd {
        Command::Trace => commands::trace(job, out_dir),
        Command::Classify => commands::classify(job, out_dir),
        Command::Invariants => commands::invariants(job, out_dir),
        Command::Mesh => commands::mesh(job, out_dir),
        Command::Verify => {
            let (files, report) = verify::verify(job, out_dir)?;
            if report.pass {
                Ok(files)
            } else {
                Err(CliError::Verification(report.failed()))
            }
        }
    }
}

/// Output directory: the flag, else `output.dir` relative to the config file, else the config's directory.
pub fn output_dir(flag: Option<&Path>, cfg: &JobConfig, config_path: &Path) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    let base = config_path.parent().unwrap_or(Path::new("."));
    match &cfg.output.dir {
        Some(d) if d.is_absolute() => d.clone(),
        Some(d) => base.join(d),
        None => base.to_path_buf(),
    }
}
