//! Line-delimited JSON record IO.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::document::{nfc, Document};

/// Per-record read failure. Carries the 1-based line number so the caller
/// can decide whether to skip or abort.
#[derive(Debug, Error)]
pub enum RecordError {
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: u64, message: String },
    #[error("line {line}: schema error: {message}")]
    Schema { line: u64, message: String },
    #[error("line {line}: {source}")]
    Io {
        line: u64,
        #[source]
        source: io::Error,
    },
}

impl RecordError {
    pub fn line(&self) -> u64 {
        match self {
            RecordError::Malformed { line, .. }
            | RecordError::Schema { line, .. }
            | RecordError::Io { line, .. } => *line,
        }
    }

    /// Short reason string used in error reports.
    pub fn reason(&self) -> String {
        match self {
            RecordError::Malformed { message, .. } => format!("malformed: {message}"),
            RecordError::Schema { message, .. } => format!("schema: {message}"),
            RecordError::Io { source, .. } => format!("io: {source}"),
        }
    }

    pub fn to_record(&self, stage: &str) -> ErrorRecord {
        ErrorRecord {
            line: self.line(),
            stage: stage.to_owned(),
            reason: self.reason(),
        }
    }
}

/// One line of an error report file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub line: u64,
    pub stage: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnError {
    #[default]
    Skip,
    Abort,
}

impl FromStr for OnError {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "skip" => Ok(OnError::Skip),
            "abort" => Ok(OnError::Abort),
            other => Err(format!("expected skip|abort, got {other:?}")),
        }
    }
}

/// Iterator over the records of a dataset stream, in file order.
pub struct DatasetReader<R> {
    inner: R,
    line: u64,
    buf: String,
}

impl<R: BufRead> DatasetReader<R> {
    pub fn new(inner: R) -> Self {
        Self {
            inner,
            line: 0,
            buf: String::new(),
        }
    }

    /// Line number of the most recently returned record.
    pub fn line(&self) -> u64 {
        self.line
    }

    pub fn into_inner(self) -> R {
        self.inner
    }
}

impl<R: BufRead> Iterator for DatasetReader<R> {
    type Item = Result<Document, RecordError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            self.line += 1;
            match self.inner.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(source) => {
                    return Some(Err(RecordError::Io {
                        line: self.line,
                        source,
                    }))
                }
            }
            let raw = self.buf.trim_end_matches(['\n', '\r']);
            if raw.trim().is_empty() {
                continue;
            }
            return Some(parse_record(raw, self.line));
        }
    }
}

fn parse_record(raw: &str, line: u64) -> Result<Document, RecordError> {
    let value: serde_json::Value =
        serde_json::from_str(raw).map_err(|e| RecordError::Malformed {
            line,
            message: e.to_string(),
        })?;
    let obj = value.as_object().ok_or_else(|| RecordError::Malformed {
        line,
        message: "record is not an object".into(),
    })?;
    for field in ["id", "text"] {
        match obj.get(field) {
            None => {
                return Err(RecordError::Schema {
                    line,
                    message: format!("missing field {field}"),
                })
            }
            Some(v) if !v.is_string() => {
                return Err(RecordError::Schema {
                    line,
                    message: format!("field {field} is not a string"),
                })
            }
            Some(_) => {}
        }
    }
    let mut doc: Document = serde_json::from_value(value).map_err(|e| RecordError::Schema {
        line,
        message: e.to_string(),
    })?;
    if doc.page_no.is_some() && doc.doc_group_id.is_none() {
        return Err(RecordError::Schema {
            line,
            message: "page_no without doc_group_id".into(),
        });
    }
    if let std::borrow::Cow::Owned(s) = nfc(&doc.text) {
        doc.text = s;
    }
    Ok(doc)
}

pub fn read_dataset(path: impl AsRef<Path>) -> io::Result<DatasetReader<BufReader<File>>> {
    Ok(DatasetReader::new(BufReader::new(File::open(path)?)))
}

pub fn read_dataset_from<R: BufRead>(reader: R) -> DatasetReader<R> {
    DatasetReader::new(reader)
}

/// Write failure. `partial` is set when some records already reached the
/// destination before the failure.
#[derive(Debug, Error)]
#[error("write failed after {written} records (partial file: {partial}): {source}")]
pub struct WriteError {
    pub written: usize,
    pub partial: bool,
    #[source]
    pub source: io::Error,
}

/// Serializes records one per line. Returns the record count.
pub fn write_dataset_to<'a, W, I>(docs: I, writer: W) -> Result<usize, WriteError>
where
    W: Write,
    I: IntoIterator<Item = &'a Document>,
{
    let mut out = BufWriter::new(writer);
    let mut written = 0usize;
    let fail = |written: usize, source: io::Error| WriteError {
        written,
        partial: written > 0,
        source,
    };
    for doc in docs {
        serde_json::to_writer(&mut out, doc).map_err(|e| fail(written, e.into()))?;
        out.write_all(b"\n").map_err(|e| fail(written, e))?;
        written += 1;
    }
    out.flush().map_err(|e| fail(written, e))?;
    Ok(written)
}

pub fn write_dataset<'a, I>(docs: I, path: impl AsRef<Path>) -> Result<usize, WriteError>
where
    I: IntoIterator<Item = &'a Document>,
{
    let file = File::create(path).map_err(|source| WriteError {
        written: 0,
        partial: false,
        source,
    })?;
    write_dataset_to(docs, file)
}
