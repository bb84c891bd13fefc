//! Run manifests, input hashing and atomic output files.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const TOOL: &str = "flatlab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Marker for standard output in manifest file lists.
pub const STDOUT: &str = "-";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    /// Produced by exact arithmetic: replay must match byte for byte.
    Exact,
    /// Floating CSV: replay compares numeric cells, using a row's
    /// `err_estimate` column as the tolerance when present.
    FloatCsv { rel_tol: f64 },
    /// Floating JSON: replay compares numbers to a relative 1e-9.
    FloatJson,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kind: Option<OutputKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Effective arguments after merging the config file, without the
    /// program name. Replay re-runs exactly these.
    pub argv: Vec<String>,
    /// Working directory that relative paths in `argv` refer to.
    pub cwd: String,
    /// Every resolved parameter of the subcommand, defaults included.
    pub params: Value,
    pub seed: u64,
    pub threads: Option<usize>,
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
    pub wall_time_s: f64,
    /// Free-form results worth keeping next to the configuration.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, Value>,
}

impl RunManifest {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::new("BadManifest", "cli", e.to_string()))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// and a rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Absolute form of `p` without requiring it to exist.
pub fn absolute(p: &Path) -> PathBuf {
    std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf())
}

/// Where a run reads and writes. Normal runs touch the named files and
/// stdout; replays redirect outputs into a scratch directory and capture
/// stdout.
#[derive(Debug, Default)]
pub struct Session {
    pub inputs: Vec<FileRecord>,
    pub outputs: Vec<FileRecord>,
    pub notes: BTreeMap<String, Value>,
    redirect: Option<PathBuf>,
    base: Option<PathBuf>,
    pub captured_stdout: Option<Vec<u8>>,
    /// Written files in the replay directory, keyed by recorded path.
    pub replayed: BTreeMap<String, PathBuf>,
}

impl Session {
    pub fn replaying(dir: PathBuf, base: PathBuf) -> Self {
        Session {
            redirect: Some(dir),
            base: Some(base),
            captured_stdout: Some(Vec::new()),
            ..Default::default()
        }
    }

    /// Absolute form of a path given on the command line.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base {
            Some(b) if p.is_relative() => b.join(p),
            _ => absolute(p),
        }
    }

    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let path = &self.resolve(path);
        let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
        self.inputs.push(FileRecord {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
            kind: None,
        });
        Ok(bytes)
    }

    pub fn read_input_text(&mut self, path: &Path) -> Result<String, CliError> {
        String::from_utf8(self.read_input(path)?)
            .map_err(|_| CliError::new("BadInput", "cli", format!("{} is not UTF-8", path.display())))
    }

    /// Writes to `path`, or to stdout when `path` is `None` or `-`.
    pub fn write_output(&mut self, path: Option<&Path>, bytes: &[u8], kind: OutputKind) -> Result<(), CliError> {
        let recorded = match path {
            Some(p) if p != Path::new(STDOUT) => self.resolve(p).display().to_string(),
            _ => STDOUT.to_string(),
        };
        if recorded == STDOUT {
            match &mut self.captured_stdout {
                Some(buf) => buf.extend_from_slice(bytes),
                None => {
                    let mut out = std::io::stdout().lock();
                    out.write_all(bytes).and_then(|_| out.flush()).map_err(|e| CliError::io(Path::new(STDOUT), e))?;
                }
            }
        } else {
            let target = match &self.redirect {
                Some(dir) => {
                    let t = dir.join(format!("out{}", self.replayed.len()));
                    self.replayed.insert(recorded.clone(), t.clone());
                    t
                }
                None => PathBuf::from(&recorded),
            };
            write_atomic(&target, bytes)?;
        }
        self.outputs.push(FileRecord {
            path: recorded,
            sha256: sha256_hex(bytes),
            kind: Some(kind),
        });
        Ok(())
    }

    pub fn note(&mut self, key: &str, value: Value) {
        self.notes.insert(key.to_string(), value);
    }
}

/// Compares two CSV documents numerically. Cells that parse as numbers must
/// agree within the row's `err_estimate` (if that column exists) plus
/// `rel_tol` relative slack; all other cells must be equal.
pub fn csv_within_tolerance(expected: &[u8], actual: &[u8], rel_tol: f64) -> Result<(), String> {
    let read = |b: &[u8]| -> Result<(csv::StringRecord, Vec<csv::StringRecord>), String> {
        let mut r = csv::Reader::from_reader(b);
        let h = r.headers().map_err(|e| e.to_string())?.clone();
        let rows = r.records().collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
        Ok((h, rows))
    };
    let (h1, r1) = read(expected)?;
    let (h2, r2) = read(actual)?;
    if h1 != h2 || r1.len() != r2.len() {
        return Err("header or row count differs".into());
    }
    let err_col = h1.iter().position(|c| c == "err_estimate");
    for (i, (a, b)) in r1.iter().zip(&r2).enumerate() {
        let tol_row = err_col.and_then(|c| a.get(c)?.parse::<f64>().ok()).unwrap_or(0.0);
        for (j, (x, y)) in a.iter().zip(b.iter()).enumerate() {
            match (x.parse::<f64>(), y.parse::<f64>()) {
                (Ok(x), Ok(y)) => {
                    let tol = tol_row + rel_tol * x.abs().max(y.abs());
                    if !((x - y).abs() <= tol || (x.is_nan() && y.is_nan())) {
                        return Err(format!("row {i}, column {}: {x} vs {y} (tolerance {tol})", &h1[j]));
                    }
                }
                _ if x == y => {}
                _ => return Err(format!("row {i}, column {}: {x:?} vs {y:?}", &h1[j])),
            }
        }
    }
    Ok(())
}
