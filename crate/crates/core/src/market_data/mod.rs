//! OHLCV minute bars: ingestion, chronological splits and synthetic data.

mod bar;
mod csv_io;
mod split;
mod synth;

pub use bar::{Bar, BarSeries, SplitLabel, MINUTES_PER_DAY};
pub use csv_io::{load_csv, load_csv_from_reader, write_csv, ColumnSchema};
pub use split::{split, SplitResult, SplitSpec};
pub use synth::{synthesize, SynthSpec};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot open {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("missing column `{0}` in CSV header")]
    MissingColumn(String),
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },
    #[error("row {row}: invalid bar: {message}")]
    InvalidBar { row: usize, message: String },
    #[error("timestamps not strictly increasing at row {row} ({previous} then {current})")]
    NonMonotone {
        row: usize,
        previous: i64,
        current: i64,
    },
    #[error("invalid split spec: {0}")]
    InvalidSplit(String),
    #[error("invalid synthesis parameters: {0}")]
    InvalidSynth(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
