use std::fs::{File, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::{LabelLog, PreferenceLabel, StoreError};

/// Line-delimited JSON file opened for durable appends.
#[derive(Debug)]
pub struct JsonlFile {
    path: PathBuf,
    file: File,
}

impl JsonlFile {
    /// Opens (creating if absent) and replays every record. A torn final
    /// line left by an interrupted append is cut off; any other unreadable
    /// line is an error.
    pub fn open<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<(Self, Vec<T>), StoreError> {
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&path)?;
        let mut text = String::new();
        file.read_to_string(&mut text)?;

        let mut records = Vec::new();
        let mut good_len = 0;
        let mut offset = 0;
        let mut lines = text.split_inclusive('\n').enumerate().peekable();
        while let Some((n, line)) = lines.next() {
            let is_last = lines.peek().is_none();
            let body = line.trim_end_matches('\n');
            offset += line.len();
            if body.trim().is_empty() {
                good_len = offset;
                continue;
            }
            match serde_json::from_str::<T>(body) {
                Ok(r) if line.ends_with('\n') => {
                    records.push(r);
                    good_len = offset;
                }
                Ok(_) | Err(_) if is_last => break,
                Ok(_) => unreachable!("only the last line can lack a newline"),
                Err(e) => {
                    return Err(StoreError::Corrupt {
                        path,
                        line: n + 1,
                        message: e.to_string(),
                    })
                }
            }
        }
        if good_len < text.len() {
            file.set_len(good_len as u64)?;
            file.sync_data()?;
        }
        Ok((Self { path, file }, records))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Appends one record and syncs it to disk before returning.
    pub fn append<T: Serialize>(&mut self, record: &T) -> Result<(), StoreError> {
        let mut line = serde_json::to_vec(record).expect("records serialize");
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.sync_data()?;
        Ok(())
    }
}

/// A [`LabelLog`] backed by an append-only `labels.jsonl` file.
#[derive(Debug)]
pub struct LabelStore {
    log: LabelLog,
    file: JsonlFile,
}

impl LabelStore {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let (file, records) = JsonlFile::open::<PreferenceLabel>(path)?;
        let log = LabelLog::from_records(records)?;
        Ok(Self { log, file })
    }

    /// Validates, persists, then indexes the label.
    pub fn append(&mut self, label: PreferenceLabel) -> Result<(), StoreError> {
        self.log.validate(&label)?;
        self.file.append(&label)?;
        self.log.append(label)
    }

    pub fn log(&self) -> &LabelLog {
        &self.log
    }

    pub fn path(&self) -> &Path {
        self.file.path()
    }
}
