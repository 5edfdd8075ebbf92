use serde::{Deserialize, Serialize};

use super::DataError;

pub const MINUTES_PER_DAY: i64 = 1440;

/// One minute of OHLCV data. `timestamp` is UTC epoch minutes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub timestamp: i64,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: f64,
}

impl Bar {
    /// Builds a bar, rejecting OHLC values that violate the candle invariants.
    pub fn new(
        timestamp: i64,
        open: f64,
        high: f64,
        low: f64,
        close: f64,
        volume: f64,
    ) -> Result<Self, String> {
        let bar = Bar {
            timestamp,
            open,
            high,
            low,
            close,
            volume,
        };
        bar.validate()?;
        Ok(bar)
    }

    pub fn validate(&self) -> Result<(), String> {
        let prices = [self.open, self.high, self.low, self.close];
        if prices.iter().any(|p| !p.is_finite() || *p <= 0.0) {
            return Err(format!("prices must be finite and positive: {prices:?}"));
        }
        if !(self.volume.is_finite() && self.volume >= 0.0) {
            return Err(format!(
                "volume must be finite and non-negative: {}",
                self.volume
            ));
        }
        if self.low > self.high {
            return Err(format!("high {} < low {}", self.high, self.low));
        }
        if self.low > self.open.min(self.close) {
            return Err(format!("low {} above min(open, close)", self.low));
        }
        if self.high < self.open.max(self.close) {
            return Err(format!("high {} below max(open, close)", self.high));
        }
        Ok(())
    }

    pub fn day(&self) -> i64 {
        self.timestamp.div_euclid(MINUTES_PER_DAY)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitLabel {
    Full,
    Train,
    Validation,
    Test,
}

impl SplitLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitLabel::Full => "full",
            SplitLabel::Train => "train",
            SplitLabel::Validation => "validation",
            SplitLabel::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" | "all" => Some(SplitLabel::Full),
            "train" => Some(SplitLabel::Train),
            "validation" | "val" => Some(SplitLabel::Validation),
            "test" => Some(SplitLabel::Test),
            _ => None,
        }
    }
}

/// Chronologically ordered bars with strictly increasing timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarSeries {
    bars: Vec<Bar>,
    label: SplitLabel,
}

impl BarSeries {
    pub fn new(bars: Vec<Bar>, label: SplitLabel) -> Result<Self, DataError> {
        for (row, bar) in bars.iter().enumerate() {
            bar.validate()
                .map_err(|message| DataError::InvalidBar { row, message })?;
        }
        for (row, pair) in bars.windows(2).enumerate() {
            if pair[1].timestamp <= pair[0].timestamp {
                return Err(DataError::NonMonotone {
                    row: row + 1,
                    previous: pair[0].timestamp,
                    current: pair[1].timestamp,
                });
            }
        }
        Ok(BarSeries { bars, label })
    }

    pub fn empty(label: SplitLabel) -> Self {
        BarSeries {
            bars: Vec::new(),
            label,
        }
    }

    pub(crate) fn from_sorted_unchecked(bars: Vec<Bar>, label: SplitLabel) -> Self {
        BarSeries { bars, label }
    }

    pub fn bars(&self) -> &[Bar] {
        &self.bars
    }

    pub fn label(&self) -> SplitLabel {
        self.label
    }

    pub fn with_label(mut self, label: SplitLabel) -> Self {
        self.label = label;
        self
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn closes(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.close).collect()
    }

    pub fn timestamps(&self) -> Vec<i64> {
        self.bars.iter().map(|b| b.timestamp).collect()
    }

    pub fn days(&self) -> Vec<i64> {
        self.bars.iter().map(Bar::day).collect()
    }

    /// Number of places where consecutive bars are more than one minute apart.
    pub fn gap_count(&self) -> usize {
        self.bars
            .windows(2)
            .filter(|w| w[1].timestamp - w[0].timestamp > 1)
            .count()
    }

    /// First `n` bars (or all of them).
    pub fn truncated(&self, n: usize) -> BarSeries {
        BarSeries {
            bars: self.bars[..n.min(self.bars.len())].to_vec(),
            label: self.label,
        }
    }

    /// Bars in `[start, end)` by position.
    pub fn slice(&self, start: usize, end: usize) -> BarSeries {
        let end = end.min(self.bars.len());
        let start = start.min(end);
        BarSeries {
            bars: self.bars[start..end].to_vec(),
            label: self.label,
        }
    }
}
