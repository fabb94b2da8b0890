//! Dataset loading with skip/abort error handling and reject files.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use forge_core::corpus::{read_dataset_from, write_dataset, Document, ErrorRecord, OnError, RecordError};
use forge_core::curriculum::Reject;
use forge_core::Measure;

use crate::data_error;
use crate::manifest::InputDigest;

/// Records read from a dataset file, with the line each came from.
#[derive(Debug, Default)]
pub struct Loaded {
    pub docs: Vec<Document>,
    pub lines: HashMap<String, u64>,
    pub errors: Vec<ErrorRecord>,
    /// Hex SHA-256 of the bytes read.
    pub sha256: String,
}

impl Loaded {
    pub fn digest(&self, role: &str, path: &Path) -> InputDigest {
        InputDigest::new(role, path, self.sha256.clone())
    }
}

struct Hashing<R> {
    inner: R,
    hasher: Sha256,
}

impl<R: Read> Read for Hashing<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }
}

/// One line of a rejects file: a stage drop or an unreadable record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RejectLine {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub stage: String,
    pub reason: String,
    #[serde(skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    pub measurements: std::collections::BTreeMap<String, Measure>,
}

impl From<ErrorRecord> for RejectLine {
    fn from(e: ErrorRecord) -> Self {
        Self {
            line: Some(e.line),
            id: None,
            stage: e.stage,
            reason: e.reason,
            measurements: Default::default(),
        }
    }
}

pub const READ_STAGE: &str = "read";

/// Loads a dataset. Under `Skip`, unreadable records and repeated ids are
/// collected as errors; under `Abort` the first one fails the load.
pub fn load(path: &Path, on_error: OnError) -> Result<Loaded> {
    let file = File::open(path).map_err(|e| data_error(format!("cannot open {}: {e}", path.display())))?;
    let mut reader = read_dataset_from(BufReader::new(Hashing {
        inner: file,
        hasher: Sha256::new(),
    }));
    let mut out = Loaded::default();
    while let Some(item) = reader.next() {
        let line = reader.line();
        let problem = match item {
            Ok(doc) if out.lines.contains_key(&doc.id) => ErrorRecord {
                line,
                stage: READ_STAGE.to_owned(),
                reason: format!("duplicate id {:?}", doc.id),
            },
            Ok(doc) => {
                out.lines.insert(doc.id.clone(), line);
                out.docs.push(doc);
                continue;
            }
            Err(e @ RecordError::Io { .. }) => {
                return Err(data_error(format!("{}: {e}", path.display())));
            }
            Err(e) => e.to_record(READ_STAGE),
        };
        if on_error == OnError::Abort {
            return Err(data_error(format!(
                "{} line {}: {}",
                path.display(),
                problem.line,
                problem.reason
            )));
        }
        out.errors.push(problem);
    }
    out.sha256 = hex::encode(reader.into_inner().into_inner().hasher.finalize());
    Ok(out)
}

pub fn create_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(())
}

pub fn save(docs: &[Document], path: &Path) -> Result<usize> {
    create_parent(path)?;
    write_dataset(docs, path).map_err(|e| data_error(format!("{}: {e}", path.display())))
}

/// Writes serializable records as JSON lines.
pub fn write_jsonl<T: Serialize>(records: &[T], path: &Path) -> Result<()> {
    create_parent(path)?;
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Read errors first, then stage drops in stage order, each tagged with the
/// input line of its record when known.
pub fn reject_lines(loaded_errors: &[ErrorRecord], rejects: &[Reject], lines: &HashMap<String, u64>) -> Vec<RejectLine> {
    loaded_errors
        .iter()
        .cloned()
        .map(RejectLine::from)
        .chain(rejects.iter().map(|r| RejectLine {
            line: lines.get(&r.id).copied(),
            id: Some(r.id.clone()),
            stage: r.stage.clone(),
            reason: r.reason.clone(),
            measurements: r.measurements.clone(),
        }))
        .collect()
}
