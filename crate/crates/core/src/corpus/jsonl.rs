//! One JSON object per line, each carrying a schema version.
//!
//! Fields the body type does not know are kept in `extra` and written back
//! after the known ones, in their original order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::CorpusError;

pub const SCHEMA_VERSION: u64 = 1;

fn current_version() -> u64 {
    SCHEMA_VERSION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record<T> {
    #[serde(default = "current_version")]
    pub schema_version: u64,
    #[serde(flatten)]
    pub body: T,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl<T> Record<T> {
    pub fn new(body: T) -> Self {
        Record {
            schema_version: SCHEMA_VERSION,
            body,
            extra: Map::new(),
        }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> CorpusError {
    CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Blank lines are skipped; line numbers are 1-based.
pub fn read_records<T: DeserializeOwned, R: Read>(reader: R) -> Result<Vec<Record<T>>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| CorpusError::MalformedLine {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line).map_err(|e| CorpusError::MalformedLine {
            line: line_no,
            message: e.to_string(),
        })?;
        if let Some(v) = value.get("schema_version") {
            let found = v.as_u64().ok_or_else(|| CorpusError::MalformedLine {
                line: line_no,
                message: format!("schema_version must be an integer, got {v}"),
            })?;
            if found != SCHEMA_VERSION {
                return Err(CorpusError::SchemaVersionMismatch {
                    line: line_no,
                    found,
                    expected: SCHEMA_VERSION,
                });
            }
        }
        let record = serde_json::from_value(value).map_err(|e| CorpusError::MalformedLine {
            line: line_no,
            message: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

pub fn write_records<T: Serialize, W: Write>(writer: W, records: &[Record<T>]) -> std::io::Result<()> {
    let mut w = BufWriter::new(writer);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_corpus<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<Record<T>>, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    read_records(file).map_err(|e| match e {
        CorpusError::MalformedLine { line, message } => CorpusError::MalformedLine {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

pub fn write_corpus<T: Serialize>(path: impl AsRef<Path>, records: &[Record<T>]) -> Result<(), CorpusError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    write_records(file, records).map_err(|e| io_err(path, e))
}

/// Reads records and drops the envelope.
pub fn read_bodies<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>, CorpusError> {
    Ok(read_corpus(path)?.into_iter().map(|r| r.body).collect())
}

pub fn write_bodies<T: Serialize + Clone>(path: impl AsRef<Path>, bodies: &[T]) -> Result<(), CorpusError> {
    let records: Vec<Record<T>> = bodies.iter().cloned().map(Record::new).collect();
    write_corpus(path, &records)
}
