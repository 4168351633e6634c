//! Output files and the run manifest written next to them.
//!
//! Reals are written in Rust's shortest round-trip scientific notation, so a
//! CSV value parses back to the exact `f64` that was computed.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// One named output, fully rendered in memory so it can be checksummed.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn sha256(&self) -> String {
        sha256_hex(&self.bytes)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// CSV with a header row.
pub fn csv_table<R, I>(name: &str, header: &[&str], rows: I) -> Result<Artifact>
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        let row = row.as_ref();
        debug_assert_eq!(row.len(), header.len());
        w.write_record(row.iter().map(|v| format!("{v:e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))?;
    Ok(Artifact { name: name.to_string(), bytes })
}

pub fn json_artifact(name: &str, value: &impl Serialize) -> Result<Artifact> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(Artifact { name: name.to_string(), bytes })
}

#[derive(Debug, Serialize)]
pub struct OutputEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

/// Everything needed to rerun a command and check its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub threads: usize,
    pub versions: Versions,
    pub wall_clock_s: f64,
    pub outputs: Vec<OutputEntry>,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub foldnoise: &'static str,
    pub target: &'static str,
}

impl Versions {
    pub fn current() -> Self {
        Versions { foldnoise: env!("CARGO_PKG_VERSION"), target: std::env::consts::ARCH }
    }
}

/// Where a command's results go.
#[derive(Debug, Clone)]
pub enum Sink {
    Stdout,
    /// A single file; extra artifacts are written next to it.
    File(PathBuf),
    Dir(PathBuf),
}

impl Sink {
    fn path_for(&self, a: &Artifact, first: bool) -> Option<PathBuf> {
        match self {
            Sink::Stdout => None,
            Sink::File(p) if first => Some(p.clone()),
            Sink::File(p) => Some(p.parent().unwrap_or(Path::new(".")).join(&a.name)),
            Sink::Dir(d) => Some(d.join(&a.name)),
        }
    }

    fn manifest_path(&self) -> Option<PathBuf> {
        match self {
            Sink::Stdout => None,
            Sink::File(p) => {
                let mut s = p.clone().into_os_string();
                s.push(".manifest.json");
                Some(s.into())
            }
            Sink::Dir(d) => Some(d.join("manifest.json")),
        }
    }
}

/// Provenance of one invocation, filled in by the caller.
#[derive(Debug, Clone)]
pub struct RunInfo {
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub threads: usize,
}

/// Write the artifacts (and a manifest unless printing to stdout).
pub fn emit(sink: &Sink, artifacts: &[Artifact], info: &RunInfo, elapsed: Duration) -> Result<()> {
    if let Sink::Dir(d) = sink {
        std::fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
    }
    let mut outputs = Vec::new();
    for (i, a) in artifacts.iter().enumerate() {
        match sink.path_for(a, i == 0) {
            None => {
                use std::io::Write;
                let mut out = std::io::stdout().lock();
                out.write_all(&a.bytes).context("writing to stdout")?;
            }
            Some(p) => {
                std::fs::write(&p, &a.bytes).with_context(|| format!("writing {}", p.display()))?;
                outputs.push(OutputEntry { path: p.display().to_string(), sha256: a.sha256(), bytes: a.bytes.len() });
            }
        }
    }
    if let Some(mp) = sink.manifest_path() {
        let m = RunManifest {
            command_line: std::env::args().collect(),
            config: info.config.clone(),
            seed: info.seed,
            threads: info.threads,
            versions: Versions::current(),
            wall_clock_s: elapsed.as_secs_f64(),
            outputs,
        };
        let text = serde_json::to_string_pretty(&m)? + "\n";
        std::fs::write(&mp, text).with_context(|| format!("writing {}", mp.display()))?;
    }
    Ok(())
}
