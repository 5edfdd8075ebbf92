use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{Bar, BarSeries, DataError, SplitLabel};

/// Header names for the six required columns. Matching is case-insensitive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnSchema {
    pub timestamp: String,
    pub open: String,
    pub high: String,
    pub low: String,
    pub close: String,
    pub volume: String,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        ColumnSchema {
            timestamp: "timestamp".into(),
            open: "open".into(),
            high: "high".into(),
            low: "low".into(),
            close: "close".into(),
            volume: "volume".into(),
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &ColumnSchema) -> Result<BarSeries, DataError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| DataError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_csv_from_reader(file, schema)
}

/// Parses bars from CSV text. Row numbers in errors count data rows from 1.
pub fn load_csv_from_reader<R: Read>(
    reader: R,
    schema: &ColumnSchema,
) -> Result<BarSeries, DataError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };
    let idx = [
        find(&schema.timestamp)?,
        find(&schema.open)?,
        find(&schema.high)?,
        find(&schema.low)?,
        find(&schema.close)?,
        find(&schema.volume)?,
    ];

    let mut bars: Vec<Bar> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| DataError::Parse {
            row,
            message: e.to_string(),
        })?;
        let field = |k: usize| record.get(idx[k]).unwrap_or("");
        let timestamp =
            parse_timestamp(field(0)).map_err(|message| DataError::Parse { row, message })?;
        let mut values = [0.0; 5];
        for (k, slot) in values.iter_mut().enumerate() {
            let raw = field(k + 1);
            *slot = raw.parse::<f64>().map_err(|_| DataError::Parse {
                row,
                message: format!("cannot parse `{raw}` as a number"),
            })?;
        }
        let [open, high, low, close, volume] = values;
        let bar = Bar::new(timestamp, open, high, low, close, volume)
            .map_err(|message| DataError::InvalidBar { row, message })?;
        if let Some(prev) = bars.last() {
            if bar.timestamp <= prev.timestamp {
                return Err(DataError::NonMonotone {
                    row,
                    previous: prev.timestamp,
                    current: bar.timestamp,
                });
            }
        }
        bars.push(bar);
    }
    Ok(BarSeries::from_sorted_unchecked(bars, SplitLabel::Full))
}

/// Accepts epoch seconds (integer or decimal) or ISO-8601; returns epoch minutes.
pub(crate) fn parse_timestamp(raw: &str) -> Result<i64, String> {
    let raw = raw.trim();
    if let Ok(secs) = raw.parse::<i64>() {
        return Ok(secs.div_euclid(60));
    }
    if let Ok(secs) = raw.parse::<f64>() {
        if secs.is_finite() {
            return Ok((secs / 60.0).floor() as i64);
        }
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(raw) {
        return Ok(dt.timestamp().div_euclid(60));
    }
    const NAIVE: [&str; 4] = [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ];
    for fmt in NAIVE {
        if let Ok(dt) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Ok(dt.and_utc().timestamp().div_euclid(60));
        }
    }
    Err(format!("unrecognised timestamp `{raw}`"))
}

pub(crate) fn format_timestamp(epoch_minutes: i64) -> String {
    DateTime::<Utc>::from_timestamp(epoch_minutes * 60, 0)
        .map(|dt| dt.format("%Y-%m-%dT%H:%M:%SZ").to_string())
        .unwrap_or_else(|| (epoch_minutes * 60).to_string())
}

/// Writes bars with ISO-8601 timestamps using the default column names.
pub fn write_csv<W: Write>(series: &BarSeries, writer: W) -> Result<(), DataError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["timestamp", "open", "high", "low", "close", "volume"])?;
    for b in series.bars() {
        w.write_record([
            format_timestamp(b.timestamp),
            b.open.to_string(),
            b.high.to_string(),
            b.low.to_string(),
            b.close.to_string(),
            b.volume.to_string(),
        ])?;
    }
    w.flush().map_err(|source| DataError::Io {
        path: "<writer>".into(),
        source,
    })?;
    Ok(())
}
