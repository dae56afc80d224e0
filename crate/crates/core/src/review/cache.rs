//! Normalized dataset cache: a header line followed by one JSON record per line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::record::{Dataset, ReviewRecord};
use super::schema::Category;
use super::ReviewError;

const FORMAT: &str = "airsat-dataset";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    category: Category,
    features: Vec<String>,
    n_records: usize,
}

pub fn write_jsonl<W: Write>(d: &Dataset, mut out: W) -> std::io::Result<()> {
    let header = Header {
        format: FORMAT.into(),
        version: VERSION,
        category: d.category(),
        features: d.schema().features().iter().map(|s| s.to_string()).collect(),
        n_records: d.len(),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for r in d.records() {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Dataset, ReviewError> {
    let mut lines = input.lines();
    let cache_err = |line: usize, reason: String| ReviewError::Cache { line, reason };
    let first = lines
        .next()
        .ok_or_else(|| cache_err(1, "empty file".into()))?
        .map_err(|e| cache_err(1, e.to_string()))?;
    let header: Header =
        serde_json::from_str(&first).map_err(|e| cache_err(1, e.to_string()))?;
    if header.format != FORMAT || header.version != VERSION {
        return Err(cache_err(
            1,
            format!(
                "unsupported format {} v{} (expected {FORMAT} v{VERSION})",
                header.format, header.version
            ),
        ));
    }
    let mut records = Vec::with_capacity(header.n_records);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        let line = line.map_err(|e| cache_err(line_no, e.to_string()))?;
        if line.is_empty() {
            continue;
        }
        let r: ReviewRecord =
            serde_json::from_str(&line).map_err(|e| cache_err(line_no, e.to_string()))?;
        records.push(r);
    }
    if records.len() != header.n_records {
        return Err(cache_err(
            records.len() + 1,
            format!(
                "truncated: header announces {} records, found {}",
                header.n_records,
                records.len()
            ),
        ));
    }
    Dataset::new(header.category, records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    #[test]
    fn roundtrip_and_byte_stability() {
        let mut r = ReviewRecord::blank(Category::Lounge);
        r.timestamp = NaiveDate::from_ymd_opt(2014, 3, 9);
        r.ratings[2] = Some(4);
        r.sentiment = Some(-0.123456789012345);
        r.text = "Très \"bon\"\nlounge".into();
        let d = Dataset::new(Category::Lounge, vec![r, ReviewRecord::blank(Category::Lounge)]).unwrap();
        let mut a = Vec::new();
        write_jsonl(&d, &mut a).unwrap();
        let back = read_jsonl(a.as_slice()).unwrap();
        assert_eq!(back, d);
        let mut b = Vec::new();
        write_jsonl(&back, &mut b).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn truncated_cache_rejected() {
        let d = Dataset::new(Category::Seat, vec![ReviewRecord::blank(Category::Seat); 3]).unwrap();
        let mut a = Vec::new();
        write_jsonl(&d, &mut a).unwrap();
        let cut = &a[..a.len() - 10];
        assert!(matches!(read_jsonl(cut), Err(ReviewError::Cache { .. })));
    }
}
