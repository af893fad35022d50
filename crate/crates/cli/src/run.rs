use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gamma_pick::io::write_json;
use gamma_pick::{Error, SolverConfig};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const EXIT_NO: u8 = 3;
pub const EXIT_UNDECIDED: u8 = 4;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Undecided { .. } => EXIT_UNDECIDED,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config: &'a SolverConfig,
    seed: u64,
    input_digest: String,
    outputs: &'a [String],
    timings: &'a BTreeMap<String, f64>,
}

/// Bookkeeping for one invocation: inputs are hashed, outputs are written
/// atomically and listed in `manifest.json`.
pub struct Run {
    command: String,
    config: SolverConfig,
    hasher: Sha256,
    outputs: Vec<String>,
    timings: BTreeMap<String, f64>,
}

impl Run {
    pub fn new(command: &str, config: &SolverConfig) -> Self {
        Run {
            command: command.to_string(),
            config: config.clone(),
            hasher: Sha256::new(),
            outputs: vec![],
            timings: BTreeMap::new(),
        }
    }

    pub fn read_input(&mut self, path: &Path) -> CliResult<String> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
        self.hasher.update((text.len() as u64).to_le_bytes());
        self.hasher.update(text.as_bytes());
        Ok(text)
    }

    pub fn timed<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *self.timings.entry(phase.to_string()).or_default() += start.elapsed().as_secs_f64();
        out
    }

    pub fn write<T: Serialize>(&mut self, dir: &Path, name: &str, value: &T) -> CliResult<PathBuf> {
        let path = dir.join(name);
        write_json(&path, value)?;
        self.outputs.push(name.to_string());
        Ok(path)
    }

    pub fn write_raw(&mut self, path: &Path, contents: &str) -> CliResult<()> {
        gamma_pick::io::write_atomic(path, contents.as_bytes())?;
        self.outputs.push(path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default());
        Ok(())
    }

    pub fn finish(self, dir: &Path) -> CliResult<()> {
        let manifest = Manifest {
            command: &self.command,
            config: &self.config,
            seed: self.config.seed,
            input_digest: hex::encode(self.hasher.finalize()),
            outputs: &self.outputs,
            timings: &self.timings,
        };
        write_json(&dir.join("manifest.json"), &manifest)?;
        Ok(())
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("cannot create {}: {e}", dir.display())))
}
