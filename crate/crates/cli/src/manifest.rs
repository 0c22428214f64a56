//! Run manifest: effective config, artifact hashes and stage timings.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use wave_elastix::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct Artifact {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

impl Artifact {
    pub fn of(path: &Path) -> Result<Self> {
        if path.is_dir() {
            // frame directories hash as the concatenation of their sorted files
            let mut entries: Vec<PathBuf> = std::fs::read_dir(path)
                .map_err(|e| Error::Io {
                    path: path.into(),
                    source: e,
                })?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file())
                .collect();
            entries.sort();
            let mut h = Sha256::new();
            let mut bytes = 0;
            for p in entries {
                let data = std::fs::read(&p).map_err(|e| Error::Io {
                    path: p.clone(),
                    source: e,
                })?;
                bytes += data.len() as u64;
                h.update(&data);
            }
            return Ok(Artifact {
                path: path.into(),
                sha256: hex::encode(h.finalize()),
                bytes,
            });
        }
        let data = std::fs::read(path).map_err(|e| Error::Io {
            path: path.into(),
            source: e,
        })?;
        Ok(Artifact {
            path: path.into(),
            sha256: hex::encode(Sha256::digest(&data)),
            bytes: data.len() as u64,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub threads: usize,
    pub config: Value,
    pub inputs: Vec<Artifact>,
    pub outputs: Vec<Artifact>,
    pub timings: Vec<Timing>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime: Option<Value>,
}

impl RunManifest {
    pub fn new(command: &str, config: &impl Serialize) -> Result<Self> {
        Ok(RunManifest {
            tool: "wave-elastix",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            threads: rayon::current_num_threads(),
            config: serde_json::to_value(config)?,
            inputs: Vec::new(),
            outputs: Vec::new(),
            timings: Vec::new(),
            runtime: None,
        })
    }

    /// Runs `f` and records its wall-clock time under `stage`.
    pub fn time<R>(&mut self, stage: &str, f: impl FnOnce() -> Result<R>) -> Result<R> {
        let start = Instant::now();
        let out = f()?;
        let seconds = start.elapsed().as_secs_f64();
        log::info!("{stage}: {seconds:.2} s");
        self.timings.push(Timing {
            stage: stage.into(),
            seconds,
        });
        Ok(out)
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(Artifact::of(path)?);
        Ok(())
    }

    pub fn output(&mut self, path: &Path) -> Result<()> {
        self.outputs.push(Artifact::of(path)?);
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        wave_elastix::io::write_atomic(path, text.as_bytes())
    }
}
