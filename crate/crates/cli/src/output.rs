//! CSV assembly, atomic file writes and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// One output file held in memory until the writer stage.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFile {
    pub name: String,
    pub contents: String,
}

/// Shortest round-trip decimal form; empty for a missing value.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

#[derive(Debug, Default)]
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut c = Csv::default();
        c.buf.push_str(&header.join(","));
        c.buf.push('\n');
        c
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for f in fields {
            if !first {
                self.buf.push(',');
            }
            first = false;
            self.buf.push_str(f.as_ref());
        }
        self.buf.push('\n');
    }

    pub fn nums(&mut self, fields: &[f64]) {
        for (i, x) in fields.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            let _ = write!(self.buf, "{x}");
        }
        self.buf.push('\n');
    }

    pub fn into_file(self, name: impl Into<String>) -> OutputFile {
        OutputFile { name: name.into(), contents: self.buf }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never observe a partial file.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, dir.join(name))
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct Diagnostics {
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
    pub max_eigen_condition: f64,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Diagnostics {
            max_trace_error: 0.0,
            max_hermiticity_error: 0.0,
            min_eigenvalue: f64::INFINITY,
            max_eigen_condition: 0.0,
        }
    }
}

impl Diagnostics {
    pub fn record(&mut self, traj: &zeno_trap::Trajectory, condition: f64) {
        self.max_trace_error = self.max_trace_error.max(traj.max_trace_error());
        self.max_hermiticity_error = self.max_hermiticity_error.max(traj.max_hermiticity_error());
        self.min_eigenvalue = self.min_eigenvalue.min(traj.min_eigenvalue());
        self.max_eigen_condition = self.max_eigen_condition.max(condition);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub timestamp_unix: u64,
    pub command: String,
    pub parameters: serde_json::Value,
    pub grids: serde_json::Value,
    pub files: Vec<FileEntry>,
    /// `null` when the command propagates no density matrix.
    pub diagnostics: Option<Diagnostics>,
}

/// Writes every file, then the manifest listing them with their digests.
pub fn write_outputs(
    dir: &Path,
    files: &[OutputFile],
    mut manifest: RunManifest,
) -> std::io::Result<RunManifest> {
    fs::create_dir_all(dir)?;
    manifest.files.clear();
    for f in files {
        write_atomic(dir, &f.name, f.contents.as_bytes())?;
        manifest.files.push(FileEntry {
            file: f.name.clone(),
            sha256: sha256_hex(f.contents.as_bytes()),
            bytes: f.contents.len(),
        });
    }
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(dir, "manifest.json", json.as_bytes())?;
    Ok(manifest)
}
