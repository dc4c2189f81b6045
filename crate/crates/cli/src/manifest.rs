use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    /// Data rows (CSV lines after the header); absent for JSON files.
    pub rows: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentManifest {
    pub config_hash: String,
    pub tool_version: String,
    pub start_time: f64,
    pub end_time: f64,
    pub outcome: String,
    pub files: Vec<FileEntry>,
}

pub fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// SHA-256 of the canonical JSON form of the configuration.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let json = serde_json::to_vec(config).expect("configs serialize");
    Sha256::digest(&json)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Inventory of `paths` (relative to `root`), sorted by path.
pub fn inventory(root: &Path, paths: &[String]) -> std::io::Result<Vec<FileEntry>> {
    let mut files = Vec::with_capacity(paths.len());
    for p in paths {
        let rows = if p.ends_with(".csv") {
            let text = std::fs::read_to_string(root.join(p))?;
            Some(text.lines().count().saturating_sub(1))
        } else {
            None
        };
        files.push(FileEntry { path: p.clone(), rows });
    }
    files.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(files)
}

pub fn tool_version() -> String {
    format!("critwave {}", env!("CARGO_PKG_VERSION"))
}
