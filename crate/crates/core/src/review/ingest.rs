//! CSV ingestion of scraped reviews, plus the canonical CSV export that
//! ingestion reads back unchanged.

use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::record::{Dataset, ReviewRecord};
use super::schema::{normalize_header, Category, Domain, RatingSchema};
use super::ReviewError;

/// A row that could not be turned into a record.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub line_no: u64,
    pub reason: String,
}

/// A value that was dropped (made absent) while the row itself was kept.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestWarning {
    pub line_no: u64,
    pub column: String,
    pub value: String,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub rejections: Vec<Rejection>,
    pub warnings: Vec<IngestWarning>,
    /// Schema features with no matching column in the header.
    pub missing_features: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Ingested {
    pub dataset: Dataset,
    pub report: IngestReport,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Column {
    Timestamp,
    Entity(u8),
    Text,
    Author,
    Overall,
    Recommended,
    Sentiment,
    Feature(usize),
}

/// Resolves a header cell. Entity columns carry a priority (lower wins) since
/// the lounge scrape has both `lounge_name` and `airline_name`.
fn classify(header: &str, schema: &RatingSchema) -> Option<Column> {
    let h = normalize_header(header);
    let col = match h.as_str() {
        "date" | "timestamp" | "review_date" => Column::Timestamp,
        "entity" => Column::Entity(0),
        "lounge_name" if schema.category == Category::Lounge => Column::Entity(1),
        "airport_name" if schema.category == Category::Airport => Column::Entity(1),
        "airline_name" => Column::Entity(2),
        "content" | "text" | "review" | "review_text" => Column::Text,
        "author" | "user" | "author_id" => Column::Author,
        "overall" | "overall_rating" => Column::Overall,
        "recommended" | "recommend" => Column::Recommended,
        "sentiment" => Column::Sentiment,
        _ => return schema.resolve_alias(&h).map(Column::Feature),
    };
    Some(col)
}

struct Layout {
    timestamp: usize,
    entity: usize,
    text: usize,
    author: Option<usize>,
    overall: Option<usize>,
    recommended: Option<usize>,
    sentiment: Option<usize>,
    features: Vec<Option<usize>>,
}

impl Layout {
    fn from_header(header: &csv::StringRecord, schema: &RatingSchema) -> Result<Self, ReviewError> {
        let mut timestamp = None;
        let mut entity: Option<(u8, usize)> = None;
        let mut text = None;
        let mut author = None;
        let mut overall = None;
        let mut recommended = None;
        let mut sentiment = None;
        let mut features = vec![None; schema.len()];
        // first occurrence wins for every column kind
        for (i, h) in header.iter().enumerate() {
            match classify(h, schema) {
                Some(Column::Timestamp) => {
                    timestamp.get_or_insert(i);
                }
                Some(Column::Entity(p)) => match entity {
                    Some((q, _)) if q <= p => {}
                    _ => entity = Some((p, i)),
                },
                Some(Column::Text) => {
                    text.get_or_insert(i);
                }
                Some(Column::Author) => {
                    author.get_or_insert(i);
                }
                Some(Column::Overall) => {
                    overall.get_or_insert(i);
                }
                Some(Column::Recommended) => {
                    recommended.get_or_insert(i);
                }
                Some(Column::Sentiment) => {
                    sentiment.get_or_insert(i);
                }
                Some(Column::Feature(f)) => {
                    features[f].get_or_insert(i);
                }
                None => {}
            }
        }
        let mut missing = Vec::new();
        if timestamp.is_none() {
            missing.push("date");
        }
        if entity.is_none() {
            missing.push("entity name");
        }
        if text.is_none() {
            missing.push("review text");
        }
        if !missing.is_empty() {
            return Err(ReviewError::MissingColumns(
                missing.into_iter().map(String::from).collect(),
            ));
        }
        Ok(Layout {
            timestamp: timestamp.unwrap(),
            entity: entity.unwrap().1,
            text: text.unwrap(),
            author,
            overall,
            recommended,
            sentiment,
            features,
        })
    }
}

/// Reads one category's CSV file.
pub fn ingest(path: &Path, category: Category) -> Result<Ingested, ReviewError> {
    let bytes = fs::read(path).map_err(|source| ReviewError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let text = std::str::from_utf8(&bytes).map_err(|e| ReviewError::Encoding {
        path: path.to_path_buf(),
        offset: e.valid_up_to(),
    })?;
    ingest_str(text, category)
}

/// Ingests CSV content already held in memory.
pub fn ingest_str(content: &str, category: Category) -> Result<Ingested, ReviewError> {
    let content = content.strip_prefix('\u{feff}').unwrap_or(content);
    let schema = category.schema();
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .has_headers(true)
        .from_reader(content.as_bytes());
    let header = reader.headers().map_err(ReviewError::Csv)?.clone();
    if header.iter().all(|h| h.trim().is_empty()) {
        return Err(ReviewError::MissingColumns(vec![
            "date".into(),
            "entity name".into(),
            "review text".into(),
        ]));
    }
    let layout = Layout::from_header(&header, &schema)?;

    let mut report = IngestReport {
        missing_features: schema
            .features()
            .iter()
            .zip(&layout.features)
            .filter(|(_, c)| c.is_none())
            .map(|(n, _)| n.to_string())
            .collect(),
        ..Default::default()
    };
    for f in &report.missing_features {
        log::warn!("{category}: no column for rating feature `{f}`; treated as absent");
    }

    let mut records = Vec::new();
    let mut row = csv::StringRecord::new();
    loop {
        let line_no = reader.position().line();
        match reader.read_record(&mut row) {
            Ok(false) => break,
            Ok(true) => {
                let line_no = row.position().map_or(line_no, |p| p.line());
                if row.len() != header.len() {
                    report.rejections.push(Rejection {
                        line_no,
                        reason: format!(
                            "expected {} fields, found {}",
                            header.len(),
                            row.len()
                        ),
                    });
                    continue;
                }
                records.push(parse_row(&row, line_no, &layout, &schema, &mut report.warnings));
            }
            Err(e) => {
                let line_no = e.position().map_or(line_no, |p| p.line());
                report.rejections.push(Rejection {
                    line_no,
                    reason: e.to_string(),
                });
                if !matches!(e.kind(), csv::ErrorKind::UnequalLengths { .. } | csv::ErrorKind::Utf8 { .. }) {
                    break;
                }
            }
        }
    }
    for w in &report.warnings {
        log::warn!(
            "line {}: {} `{}` {}; value dropped",
            w.line_no,
            w.column,
            w.value,
            w.reason
        );
    }
    for r in &report.rejections {
        log::warn!("line {}: row rejected: {}", r.line_no, r.reason);
    }
    let dataset = Dataset::new(category, records)?;
    Ok(Ingested { dataset, report })
}

fn parse_row(
    row: &csv::StringRecord,
    line_no: u64,
    layout: &Layout,
    schema: &RatingSchema,
    warnings: &mut Vec<IngestWarning>,
) -> ReviewRecord {
    let field = |i: usize| row.get(i).unwrap_or("").trim();
    let mut warn = |column: &str, value: &str, reason: &str| {
        warnings.push(IngestWarning {
            line_no,
            column: column.to_string(),
            value: value.to_string(),
            reason: reason.to_string(),
        })
    };

    let raw_date = field(layout.timestamp);
    let timestamp = if raw_date.is_empty() {
        None
    } else {
        let parsed = parse_date(raw_date);
        if parsed.is_none() {
            warn("date", raw_date, "is not a calendar date");
        }
        parsed
    };

    let mut rating = |col: Option<usize>, name: &str, domain: Domain| -> Option<u8> {
        let raw = field(col?);
        if raw.is_empty() {
            return None;
        }
        match parse_integral(raw) {
            Some(v) if v >= i64::from(domain.min) && v <= i64::from(domain.max) => Some(v as u8),
            Some(_) => {
                warn(name, raw, &format!("outside {}..{}", domain.min, domain.max));
                None
            }
            None => {
                warn(name, raw, "is not an integer rating");
                None
            }
        }
    };

    let ratings = schema
        .features()
        .iter()
        .zip(&layout.features)
        .map(|(name, col)| rating(*col, name, schema.feature_domain()))
        .collect();
    let overall = rating(layout.overall, "overall", schema.overall_domain());

    let recommended = layout.recommended.and_then(|c| {
        let raw = field(c);
        if raw.is_empty() {
            return None;
        }
        let parsed = parse_flag(raw);
        if parsed.is_none() {
            warn("recommended", raw, "is not a yes/no flag");
        }
        parsed
    });

    let sentiment = layout.sentiment.and_then(|c| {
        let raw = field(c);
        if raw.is_empty() {
            return None;
        }
        match raw.parse::<f64>() {
            Ok(v) if (-1.0..=1.0).contains(&v) => Some(v),
            Ok(_) => {
                warn("sentiment", raw, "outside [-1, 1]");
                None
            }
            Err(_) => {
                warn("sentiment", raw, "is not a number");
                None
            }
        }
    });

    let author = layout
        .author
        .map(field)
        .filter(|a| !a.is_empty())
        .map(str::to_string);

    ReviewRecord {
        category: schema.category,
        author,
        timestamp,
        entity: field(layout.entity).to_string(),
        ratings,
        overall,
        recommended,
        // text is kept verbatim, including surrounding whitespace
        text: row.get(layout.text).unwrap_or("").to_string(),
        sentiment,
    }
}

fn parse_date(raw: &str) -> Option<NaiveDate> {
    const FORMATS: [&str; 4] = ["%Y-%m-%d", "%d %B %Y", "%d/%m/%Y", "%B %d, %Y"];
    let head = raw.get(..10).filter(|h| h.len() == 10).unwrap_or(raw);
    NaiveDate::parse_from_str(head, "%Y-%m-%d")
        .ok()
        .or_else(|| {
            let cleaned = strip_ordinal_suffixes(raw);
            FORMATS
                .iter()
                .find_map(|f| NaiveDate::parse_from_str(&cleaned, f).ok())
        })
}

/// "2nd August 2015" -> "2 August 2015"
fn strip_ordinal_suffixes(raw: &str) -> String {
    raw.split_whitespace()
        .map(|w| {
            let digits = w.trim_end_matches(|c: char| c.is_ascii_alphabetic());
            if !digits.is_empty()
                && digits.chars().all(|c| c.is_ascii_digit())
                && matches!(&w[digits.len()..], "st" | "nd" | "rd" | "th")
            {
                digits
            } else {
                w
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Accepts "4" and "4.0" (the scrape stores ratings as floats).
fn parse_integral(raw: &str) -> Option<i64> {
    if let Ok(v) = raw.parse::<i64>() {
        return Some(v);
    }
    let f = raw.parse::<f64>().ok()?;
    (f.is_finite() && f.fract() == 0.0 && f.abs() < 1e9).then_some(f as i64)
}

fn parse_flag(raw: &str) -> Option<bool> {
    match raw.to_ascii_lowercase().as_str() {
        "1" | "1.0" | "yes" | "y" | "true" => Some(true),
        "0" | "0.0" | "no" | "n" | "false" => Some(false),
        _ => None,
    }
}

/// Writes the canonical CSV layout that [`ingest`] reads back unchanged.
pub fn export_csv<W: Write>(dataset: &Dataset, out: W) -> Result<(), ReviewError> {
    let schema = dataset.schema();
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut header = vec!["date", "entity", "author", "overall"];
    header.extend_from_slice(schema.features());
    header.extend_from_slice(&["recommended", "sentiment", "text"]);
    w.write_record(&header).map_err(ReviewError::Csv)?;

    let opt = |v: Option<u8>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in dataset.records() {
        let mut row = vec![
            r.timestamp.map(|d| d.format("%Y-%m-%d").to_string()).unwrap_or_default(),
            r.entity.clone(),
            r.author.clone().unwrap_or_default(),
            opt(r.overall),
        ];
        row.extend(r.ratings.iter().map(|v| opt(*v)));
        row.push(match r.recommended {
            Some(true) => "1".into(),
            Some(false) => "0".into(),
            None => String::new(),
        });
        row.push(r.sentiment.map(|s| s.to_string()).unwrap_or_default());
        row.push(r.text.clone());
        w.write_record(&row).map_err(ReviewError::Csv)?;
    }
    w.flush().map_err(|source| ReviewError::Io {
        path: "<csv export>".into(),
        source,
    })?;
    Ok(())
}

/// Line-delimited JSON rejection report, one `{line_no, reason}` per line.
pub fn write_rejections<W: Write>(rejections: &[Rejection], mut out: W) -> std::io::Result<()> {
    for r in rejections {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
