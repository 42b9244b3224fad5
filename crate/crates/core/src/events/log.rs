use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use super::{EventError, EventRecord};

enum Sink {
    File { path: PathBuf, file: File },
    Memory(Vec<u8>),
}

struct Writer {
    sink: Sink,
    next_seq: u64,
}

/// Single-writer append point for event records. Every append is one JSON
/// line; the sequence number of a record is its 0-based line index.
pub struct EventLog {
    writer: Mutex<Writer>,
}

impl EventLog {
    /// Opens (or creates) a log file. Numbering continues after the lines
    /// already present.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, EventError> {
        let path = path.as_ref().to_path_buf();
        let existing = match File::open(&path) {
            Ok(f) => BufReader::new(f).lines().count() as u64,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => 0,
            Err(e) => return Err(e.into()),
        };
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self {
            writer: Mutex::new(Writer {
                sink: Sink::File { path, file },
                next_seq: existing,
            }),
        })
    }

    pub fn in_memory() -> Self {
        Self {
            writer: Mutex::new(Writer {
                sink: Sink::Memory(Vec::new()),
                next_seq: 0,
            }),
        }
    }

    pub fn append(&self, record: &EventRecord) -> Result<u64, EventError> {
        Ok(self.append_batch(std::slice::from_ref(record))?[0])
    }

    /// Appends all records contiguously; nothing else is interleaved.
    /// Either every record is valid and written, or none is.
    pub fn append_batch(&self, records: &[EventRecord]) -> Result<Vec<u64>, EventError> {
        for r in records {
            r.validate()?;
        }
        let mut buf = String::new();
        for r in records {
            buf.push_str(&r.to_json());
            buf.push('\n');
        }
        let mut w = self.writer.lock().expect("event log lock poisoned");
        match &mut w.sink {
            Sink::File { file, .. } => {
                file.write_all(buf.as_bytes())?;
                file.sync_data()?;
            }
            Sink::Memory(bytes) => bytes.extend_from_slice(buf.as_bytes()),
        }
        let first = w.next_seq;
        w.next_seq += records.len() as u64;
        Ok((first..w.next_seq).collect())
    }

    /// Validates a raw JSON record, then appends it.
    pub fn append_json(&self, value: serde_json::Value) -> Result<u64, EventError> {
        self.append(&EventRecord::from_value(value)?)
    }

    /// The log contents as of now.
    pub fn snapshot(&self) -> Result<String, EventError> {
        let w = self.writer.lock().expect("event log lock poisoned");
        match &w.sink {
            Sink::File { path, .. } => Ok(fs::read_to_string(path)?),
            Sink::Memory(bytes) => Ok(String::from_utf8_lossy(bytes).into_owned()),
        }
    }

    pub fn len(&self) -> u64 {
        self.writer.lock().expect("event log lock poisoned").next_seq
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
