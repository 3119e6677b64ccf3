//! Append-only preference label storage, campaign statistics and exports.

mod export;
mod label;
mod log;
mod persist;

use std::path::PathBuf;

use thiserror::Error;

use crate::prompt::PairKey;

pub use export::{
    export_labels, import_labels, ExportFormat, ExportHeader, ExportSummary, PairSummary,
    UserSummary,
};
pub use label::{ConsistencyRecord, PreferenceLabel};
pub use log::{LabelLog, PairStatistics};
pub use persist::{JsonlFile, LabelStore};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("user `{user}` already labeled {pair}")]
    DuplicateUniqueLabel { user: String, pair: PairKey },
    #[error("invalid score {0}; expected 0, 0.5 or 1")]
    InvalidScore(f64),
    #[error("label submitted before it was issued")]
    InvalidTimestamps,
    #[error("user `{0}` has no consistency checks")]
    NoChecks(String),
    #[error("unsupported export format `{0}`")]
    UnsupportedFormat(String),
    #[error("corrupt record in {path} at line {line}: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("malformed export: {0}")]
    MalformedExport(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
