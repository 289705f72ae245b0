//! Output directory handling: the advisory lock, validated file writes,
//! checksums and the per-command run summary.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

pub const LOCK_FILE: &str = ".scarystats.lock";

/// Exclusive lock on an output directory, released on drop.
pub struct DirLock {
    path: PathBuf,
}

impl DirLock {
    pub fn acquire(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(DirLock { path })
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(CliError::Locked { path }),
            Err(e) => Err(CliError::io(&path, e)),
        }
    }
}

impl Drop for DirLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let mut file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf).map_err(|e| CliError::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
struct RunSummary<'a> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    threads: usize,
    wall_time_secs: f64,
    parameters: &'a std::collections::BTreeMap<String, String>,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

/// Tracks one command's inputs and outputs under `<out>/<stage>/`.
pub struct Run<'a> {
    pub command: &'static str,
    pub config: &'a RunConfig,
    pub stage_dir: PathBuf,
    started: Instant,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl<'a> Run<'a> {
    pub fn start(command: &'static str, stage: &str, config: &'a RunConfig) -> Result<Self, CliError> {
        let stage_dir = config.out_dir().join(stage);
        fs::create_dir_all(&stage_dir).map_err(|e| CliError::io(&stage_dir, e))?;
        log::info!("{command}: writing to {}", stage_dir.display());
        Ok(Run {
            command,
            config,
            stage_dir,
            started: Instant::now(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    pub fn input(&mut self, path: impl Into<PathBuf>) {
        self.inputs.push(path.into());
    }

    /// Writes `name` in the stage directory through a temporary file, so a
    /// failed write never leaves a truncated output behind.
    pub fn write<F>(&mut self, name: &str, body: F) -> Result<PathBuf, CliError>
    where
        F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
    {
        let path = self.stage_dir.join(name);
        let tmp = self.stage_dir.join(format!(".{name}.tmp"));
        let file = File::create(&tmp).map_err(|e| CliError::io(&tmp, e))?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        w.flush().map_err(|e| CliError::io(&tmp, e))?;
        drop(w);
        fs::rename(&tmp, &path).map_err(|e| CliError::io(&path, e))?;
        self.outputs.push(path.clone());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            w.write_all(b"\n").map_err(|e| CliError::io(name, e))
        })
    }

    /// Checks every output is present and non-empty, then writes `run.json`.
    pub fn finish(self) -> Result<(), CliError> {
        for p in &self.outputs {
            let len = fs::metadata(p).map_err(|e| CliError::io(p, e))?.len();
            if len == 0 {
                return Err(CliError::Validation(format!("{} is empty", p.display())));
            }
        }
        let digests = |paths: &[PathBuf]| -> Result<Vec<FileDigest>, CliError> {
            paths
                .iter()
                .map(|p| {
                    Ok(FileDigest {
                        path: p.display().to_string(),
                        sha256: sha256_file(p)?,
                    })
                })
                .collect()
        };
        let summary = RunSummary {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            seed: self.config.seed()?,
            threads: rayon::current_num_threads(),
            wall_time_secs: self.started.elapsed().as_secs_f64(),
            parameters: self.config.values(),
            inputs: digests(&self.inputs)?,
            outputs: digests(&self.outputs)?,
        };
        let path = self.stage_dir.join(format!("run_{}.json", self.command));
        let text = serde_json::to_string_pretty(&summary)?;
        fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
        log::info!("{} finished in {:.2}s", self.command, summary.wall_time_secs);
        Ok(())
    }
}

/// A file produced by an earlier command.
pub fn prerequisite(path: PathBuf, what: &str, command: &'static str) -> Result<PathBuf, CliError> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(CliError::MissingPrerequisite {
            what: what.to_string(),
            path,
            command,
        })
    }
}
