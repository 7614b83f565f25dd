//! Input loading and atomic output helpers shared by the subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use coinft::dataio::atomic_write;
use coinft::sensor::SensorParams;

use crate::error::{CliError, CliResult};

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Default sensor parameters unless a parameter file is given.
pub fn load_sensor(path: Option<&Path>) -> CliResult<SensorParams> {
    match path {
        None => Ok(SensorParams::default()),
        Some(p) => SensorParams::from_toml(&read_text(p)?)
            .map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))),
    }
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))
}

/// Output files staged in memory and written only once all are ready.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, path: PathBuf, bytes: impl Into<Vec<u8>>) {
        self.files.push((path, bytes.into()));
    }

    pub fn commit(self, dir: &Path) -> CliResult<Vec<PathBuf>> {
        ensure_dir(dir)?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, bytes) in self.files {
            let path = dir.join(name);
            atomic_write(&path, &bytes)?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn opt_float(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Rayon pool for `--jobs`; one thread means plain sequential work.
pub fn pool(jobs: usize) -> CliResult<rayon::ThreadPool> {
    if jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))
}
