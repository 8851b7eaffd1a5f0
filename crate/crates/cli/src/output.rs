//! Atomic file output and the mapping / trace file formats.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use swapsat::mapping_search::{Mapping, TraceEntry};

/// Writes via a temp file in the target directory plus rename, so failures
/// leave no partial output behind.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temp file in {}", dir.display()))?;
    std::io::Write::write_all(&mut tmp, bytes)?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct MappingFile {
    assignment: Vec<usize>,
    l_min: usize,
}

pub fn write_mapping(mapping: &Mapping, l_min: usize, path: &Path) -> Result<()> {
    let file = MappingFile { assignment: mapping.assignment().to_vec(), l_min };
    let mut s = serde_json::to_string(&file)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn read_mapping(path: &Path, num_physical: usize) -> Result<Mapping> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: MappingFile = serde_json::from_str(&text)?;
    Ok(Mapping::new(file.assignment, num_physical)?)
}

/// Trace CSV with columns `l,status,seconds` (seconds to 3 decimals).
pub fn trace_csv(trace: &[TraceEntry]) -> String {
    let mut out = String::from("l,status,seconds\n");
    for entry in trace {
        out.push_str(&format!("{},{},{:.3}\n", entry.l, entry.status, entry.seconds));
    }
    out
}

pub fn write_trace_csv(trace: &[TraceEntry], path: &Path) -> Result<()> {
    write_atomic(path, trace_csv(trace).as_bytes())
}
