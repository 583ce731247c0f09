use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Every way a run can end badly, with its exit code.
#[derive(Debug)]
pub enum Failure {
    /// 1: a verification suite found a violated property.
    Verify(String),
    /// 2: bad arguments, unreadable or malformed input, unknown suite.
    Usage(String),
    /// 3: the input state (or a derived quantity) breaks an invariant.
    Invalid(String),
    /// 4: the protocol harness rejected a capability violation.
    Violation(String),
    /// 5: report files could not be written.
    Io(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Verify(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Invalid(_) => 3,
            Failure::Violation(_) => netcoh::ndqc2::ProtocolError::VIOLATION_EXIT_CODE,
            Failure::Io(_) => 5,
        }
    }

    pub fn exit(&self) -> ExitCode {
        ExitCode::from(self.code())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, msg) = match self {
            Failure::Verify(m) => ("verification failed", m),
            Failure::Usage(m) => ("usage error", m),
            Failure::Invalid(m) => ("invalid input", m),
            Failure::Violation(m) => ("capability violation", m),
            Failure::Io(m) => ("i/o error", m),
        };
        write!(f, "{kind}: {msg}")
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Dotted-key leaves of a JSON value; object keys come out sorted.
pub fn flatten(value: &Value) -> Vec<(String, String)> {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
        match v {
            Value::Object(map) => map.iter().for_each(|(k, x)| walk(&key(k), x, out)),
            Value::Array(xs) => xs.iter().enumerate().for_each(|(i, x)| walk(&key(&i.to_string()), x, out)),
            Value::Null => out.push((prefix.to_string(), String::new())),
            Value::String(s) => out.push((prefix.to_string(), s.clone())),
            other => out.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut out = Vec::new();
    walk("", value, &mut out);
    out
}

/// One report as a header and a single CSV row.
pub fn to_csv_row<T: Serialize>(value: &T) -> Result<String, Failure> {
    let v = serde_json::to_value(value).map_err(|e| Failure::Io(e.to_string()))?;
    let leaves = flatten(&v);
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Io(e.to_string());
    w.write_record(leaves.iter().map(|(k, _)| k)).map_err(io)?;
    w.write_record(leaves.iter().map(|(_, x)| x)).map_err(io)?;
    finish_csv(w)
}

pub fn to_csv_rows<T: Serialize>(rows: &[T]) -> Result<String, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Failure::Io(e.to_string()))?;
    }
    finish_csv(w)
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String, Failure> {
    let bytes = w.into_inner().map_err(|e| Failure::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::Io(e.to_string()))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// What is needed to reproduce a run. The duration is the only field that
/// changes between identical invocations, so it lives here and not in the
/// reports.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub seed: u64,
    pub version: String,
    pub inputs: Vec<InputDigest>,
    pub duration_seconds: f64,
}

/// Files produced by a command, written in order after it finishes.
#[derive(Debug, Default)]
pub struct Outputs {
    pub files: Vec<(String, String)>,
}

impl Outputs {
    pub fn add(&mut self, name: &str, contents: String) {
        self.files.push((name.to_string(), contents));
    }

    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>, Failure> {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
        self.files
            .iter()
            .map(|(name, contents)| {
                let path = dir.join(name);
                std::fs::write(&path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
                Ok(path)
            })
            .collect()
    }
}
