use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use slowhom::family::Verdict;

use crate::config::RunConfig;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Top-level shape of every JSON file the tool writes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    pub schema_version: u32,
    pub kind: String,
    pub verdict: Verdict,
    pub run_config: RunConfig,
    pub report: serde_json::Value,
    pub metadata: Metadata,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool_version: String,
    pub generated_unix_seconds: u64,
    pub threads: usize,
}

impl Metadata {
    pub fn now() -> Self {
        Metadata {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            generated_unix_seconds: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            threads: rayon::current_num_threads(),
        }
    }
}

pub fn exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Pass => 0,
        Verdict::Fail => 1,
        Verdict::Inconclusive => 3,
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::Io(path.display().to_string(), e);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn write_artifact(path: &Path, artifact: &Artifact) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(artifact).map_err(|e| CliError::Report(e.to_string()))?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_artifact(path: &Path) -> Result<Artifact, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    let a: Artifact = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: not a slowhom artifact: {e}", path.display())))?;
    if a.schema_version != SCHEMA_VERSION {
        return Err(CliError::Usage(format!("{}: schema version {} is not supported", path.display(), a.schema_version)));
    }
    Ok(a)
}
