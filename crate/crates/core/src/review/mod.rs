//! Review data model for the four Skytrax categories: schemas, ingestion,
//! statistics, chronological ordering and the normalized JSONL cache.

mod cache;
mod ingest;
mod record;
mod schema;
mod stats;

use std::path::PathBuf;

pub use cache::{read_jsonl, write_jsonl};
pub use ingest::{
    export_csv, ingest, ingest_str, write_rejections, IngestReport, IngestWarning, Ingested,
    Rejection,
};
pub use record::{Dataset, ReviewRecord};
pub use schema::{Category, Domain, RatingSchema, UnknownCategory};
pub use stats::{stats, DatasetStats};

#[derive(Debug, thiserror::Error)]
pub enum ReviewError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} is not valid UTF-8 (first invalid byte at offset {offset})")]
    Encoding { path: PathBuf, offset: usize },
    #[error("header is missing mandatory columns: {}", .0.join(", "))]
    MissingColumns(Vec<String>),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("record {index}: {reason}")]
    InvalidRecord { index: usize, reason: String },
    #[error("dataset cache line {line}: {reason}")]
    Cache { line: usize, reason: String },
}

/// Stable sort by date, oldest first. Undated records go first, in input order.
pub fn sort_chronological(d: &Dataset) -> Dataset {
    let mut records = d.records().to_vec();
    // Option<NaiveDate> orders None before Some; sort_by_key is stable
    records.sort_by_key(|r| r.timestamp);
    let undated = records.iter().take_while(|r| r.timestamp.is_none()).count();
    if undated > 0 {
        log::warn!(
            "{}: {undated} record(s) without a date placed at the start",
            d.category()
        );
    }
    d.with_records(records)
}
