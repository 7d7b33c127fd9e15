//! CSV tables and their run manifests.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Everything needed to rerun a command and check its output.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a, P: Serialize> {
    pub command: &'a str,
    pub version: &'a str,
    pub parameters: &'a P,
    pub master_seed: Option<u64>,
    pub output: String,
    pub sha256: String,
}

/// A header and rows of numbers.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> io::Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| format!("{v:.15e}")))?;
        }
        w.into_inner().map_err(|e| e.into_error())
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    out.with_extension("manifest.json")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes the table to `out` and the manifest next to it; returns the
/// manifest path.
pub fn write_table<P: Serialize>(
    table: &Table,
    out: &Path,
    command: &str,
    parameters: &P,
    master_seed: Option<u64>,
) -> io::Result<PathBuf> {
    let bytes = table.to_csv()?;
    fs::write(out, &bytes)?;
    let manifest = RunManifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        parameters,
        master_seed,
        output: out
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        sha256: sha256_hex(&bytes),
    };
    let path = manifest_path(out);
    let mut json = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
    json.push('\n');
    fs::write(&path, json)?;
    Ok(path)
}
