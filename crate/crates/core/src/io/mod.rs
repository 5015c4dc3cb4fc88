//! Instance files, result bundles and MPS export.

mod mps;
mod results;

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::domain::{Instance, Violation};

pub use mps::{export_mps, parse_mps, to_mps_string};
pub use results::{format_number, read_results, write_results, ResultBundle, RunMeta, BUNDLE_FILES};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Malformed { line: usize, column: usize, message: String },
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error("invalid instance ({} violations)", .0.len())]
    Invalid(Vec<Violation>),
    #[error("{file}: {message}")]
    Bundle { file: String, message: String },
    #[error("MPS line {line}: {message}")]
    Mps { line: usize, message: String },
}

impl IoError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Converts a deserializer path into a JSON pointer.
fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for segment in path.iter() {
        out.push('/');
        match segment {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

/// Parses an instance document without validating it. Syntax and schema
/// errors are reported separately.
pub fn parse_instance_unchecked(text: &str) -> Result<Instance, IoError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| IoError::Malformed {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    serde_path_to_error::deserialize(value).map_err(|e| {
        let pointer = json_pointer(e.path());
        IoError::Schema {
            pointer: if pointer.is_empty() { "/".to_string() } else { pointer },
            message: e.into_inner().to_string(),
        }
    })
}

/// Parses and validates an instance document.
pub fn parse_instance(text: &str) -> Result<Instance, IoError> {
    let inst = parse_instance_unchecked(text)?;
    let violations = inst.validate();
    if violations.is_empty() {
        Ok(inst)
    } else {
        Err(IoError::Invalid(violations))
    }
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance, IoError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    parse_instance(&text)
}

/// Pretty-printed JSON with a trailing newline.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut s = serde_json::to_string_pretty(inst).expect("instance serializes");
    s.push('\n');
    s
}

pub fn write_instance(inst: &Instance, path: impl AsRef<Path>) -> Result<(), IoError> {
    let path = path.as_ref();
    fs::write(path, serialize_instance(inst)).map_err(|e| IoError::io(path, e))
}
