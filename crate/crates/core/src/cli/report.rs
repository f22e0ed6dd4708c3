use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

use super::config::RunConfig;

pub const SCHEMA_VERSION: &str = "hecke-walk.report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    CheckFailed,
    PreconditionViolated,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::PreconditionViolated => 2,
            Status::CheckFailed => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::CheckFailed => "check failed",
            Status::PreconditionViolated => "precondition violated",
        }
    }
}

/// Exit code for an error that aborted the run.
pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Precondition(_) => 2,
        _ => 1,
    }
}

/// What a subcommand produced, before it is written anywhere.
#[derive(Debug)]
pub struct Outcome {
    pub status: Status,
    pub result: Value,
    /// Extra files, by name, written next to the report.
    pub artifacts: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    pub fn new(status: Status, result: impl Serialize) -> Result<Self> {
        Ok(Outcome { status, result: serde_json::to_value(result)?, artifacts: Vec::new() })
    }

    pub fn with_artifact(mut self, name: &str, bytes: Vec<u8>) -> Self {
        self.artifacts.push((name.to_string(), bytes));
        self
    }
}

#[derive(Serialize)]
struct Envelope<'a> {
    schema_version: &'static str,
    subcommand: &'static str,
    seed: u64,
    status: Status,
    exit_code: i32,
    config: &'a RunConfig,
    artifacts: Vec<&'a str>,
    result: &'a Value,
}

pub fn render(config: &RunConfig, outcome: &Outcome) -> Result<String> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        subcommand: config.subcommand.name(),
        seed: config.seed,
        status: outcome.status,
        exit_code: outcome.status.exit_code(),
        config,
        artifacts: outcome.artifacts.iter().map(|(n, _)| n.as_str()).collect(),
        result: &outcome.result,
    };
    let mut s = serde_json::to_string_pretty(&env)?;
    s.push('\n');
    Ok(s)
}

/// Writes the report and artifacts into `dir`, each through a temporary file
/// and a rename. Returns the report path.
pub fn emit(dir: &Path, config: &RunConfig, outcome: &Outcome) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    for (name, bytes) in &outcome.artifacts {
        write_atomic(&dir.join(name), bytes)?;
    }
    let path = dir.join(format!("{}.json", config.subcommand.name()));
    write_atomic(&path, render(config, outcome)?.as_bytes())?;
    Ok(path)
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(std::io::Error::other(format!("no file name in {}", path.display()))))?;
    let tmp = path.with_file_name(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
