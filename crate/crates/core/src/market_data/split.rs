use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{BarSeries, DataError, SplitLabel, MINUTES_PER_DAY};

/// Chronological train / validation / test windows.
///
/// Dates are inclusive calendar days; internally each window is the
/// half-open minute range `[start 00:00, (end + 1 day) 00:00)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_start: NaiveDate,
    pub train_end: NaiveDate,
    pub val_start: NaiveDate,
    pub val_end: NaiveDate,
    pub test_start: NaiveDate,
    pub test_end: NaiveDate,
}

impl Default for SplitSpec {
    /// Train 2022–2023, validation 2024, test 2025-01-01 through 2025-10-10.
    fn default() -> Self {
        let d = |y, m, day| NaiveDate::from_ymd_opt(y, m, day).expect("valid date");
        SplitSpec {
            train_start: d(2022, 1, 1),
            train_end: d(2023, 12, 31),
            val_start: d(2024, 1, 1),
            val_end: d(2024, 12, 31),
            test_start: d(2025, 1, 1),
            test_end: d(2025, 10, 10),
        }
    }
}

fn day_number(date: NaiveDate) -> i64 {
    date.signed_duration_since(NaiveDate::from_ymd_opt(1970, 1, 1).expect("epoch"))
        .num_days()
}

fn date_of_day(day: i64) -> NaiveDate {
    NaiveDate::from_ymd_opt(1970, 1, 1).expect("epoch") + chrono::Duration::days(day)
}

impl SplitSpec {
    pub fn validate(&self) -> Result<(), DataError> {
        let windows = [
            ("train", self.train_start, self.train_end),
            ("validation", self.val_start, self.val_end),
            ("test", self.test_start, self.test_end),
        ];
        for (name, start, end) in windows {
            if end < start {
                return Err(DataError::InvalidSplit(format!(
                    "{name} ends before it starts"
                )));
            }
        }
        if self.train_end >= self.val_start {
            return Err(DataError::InvalidSplit(
                "train_end must precede val_start".into(),
            ));
        }
        if self.val_end >= self.test_start {
            return Err(DataError::InvalidSplit(
                "val_end must precede test_start".into(),
            ));
        }
        Ok(())
    }

    /// Minute range `[start, end)` of a window.
    pub fn minute_range(&self, label: SplitLabel) -> Option<(i64, i64)> {
        let (start, end) = match label {
            SplitLabel::Train => (self.train_start, self.train_end),
            SplitLabel::Validation => (self.val_start, self.val_end),
            SplitLabel::Test => (self.test_start, self.test_end),
            SplitLabel::Full => return None,
        };
        Some((
            day_number(start) * MINUTES_PER_DAY,
            (day_number(end) + 1) * MINUTES_PER_DAY,
        ))
    }

    pub fn days(&self, label: SplitLabel) -> Option<i64> {
        self.minute_range(label)
            .map(|(a, b)| (b - a) / MINUTES_PER_DAY)
    }

    /// Day-aligned windows covering a series by whole-day fractions.
    ///
    /// Useful for synthetic or short data sets where fixed calendar dates do
    /// not apply. Each window gets at least one day.
    pub fn by_fractions(
        series: &BarSeries,
        train: f64,
        validation: f64,
    ) -> Result<Self, DataError> {
        let (first, last) = match (series.bars().first(), series.bars().last()) {
            (Some(a), Some(b)) => (a.day(), b.day()),
            _ => {
                return Err(DataError::InvalidSplit(
                    "cannot split an empty series".into(),
                ))
            }
        };
        let n_days = last - first + 1;
        if n_days < 3 {
            return Err(DataError::InvalidSplit(format!(
                "need at least 3 days of data, found {n_days}"
            )));
        }
        if !(train > 0.0 && validation > 0.0 && train + validation < 1.0) {
            return Err(DataError::InvalidSplit(
                "fractions must be positive and sum below 1".into(),
            ));
        }
        let n_train = ((n_days as f64 * train).round() as i64).clamp(1, n_days - 2);
        let n_val = ((n_days as f64 * validation).round() as i64).clamp(1, n_days - n_train - 1);
        let spec = SplitSpec {
            train_start: date_of_day(first),
            train_end: date_of_day(first + n_train - 1),
            val_start: date_of_day(first + n_train),
            val_end: date_of_day(first + n_train + n_val - 1),
            test_start: date_of_day(first + n_train + n_val),
            test_end: date_of_day(last),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone)]
pub struct SplitResult {
    pub train: BarSeries,
    pub validation: BarSeries,
    pub test: BarSeries,
    pub dropped: usize,
    /// Non-fatal diagnostics, e.g. an empty window.
    pub warnings: Vec<String>,
}

impl SplitResult {
    pub fn get(&self, label: SplitLabel) -> Option<&BarSeries> {
        match label {
            SplitLabel::Train => Some(&self.train),
            SplitLabel::Validation => Some(&self.validation),
            SplitLabel::Test => Some(&self.test),
            SplitLabel::Full => None,
        }
    }
}

/// Assigns each bar to at most one window; bars outside every window are dropped.
pub fn split(series: &BarSeries, spec: &SplitSpec) -> Result<SplitResult, DataError> {
    spec.validate()?;
    let labels = [SplitLabel::Train, SplitLabel::Validation, SplitLabel::Test];
    let ranges: Vec<(i64, i64)> = labels
        .iter()
        .map(|&l| spec.minute_range(l).expect("split label"))
        .collect();
    let mut parts: [Vec<_>; 3] = Default::default();
    let mut dropped = 0;
    for bar in series.bars() {
        match ranges
            .iter()
            .position(|&(a, b)| bar.timestamp >= a && bar.timestamp < b)
        {
            Some(i) => parts[i].push(*bar),
            None => dropped += 1,
        }
    }
    let mut warnings = Vec::new();
    for (label, part) in labels.iter().zip(parts.iter()) {
        if part.is_empty() {
            let msg = format!("{} split is empty", label.as_str());
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }
    let [train, validation, test] = parts;
    Ok(SplitResult {
        train: BarSeries::from_sorted_unchecked(train, SplitLabel::Train),
        validation: BarSeries::from_sorted_unchecked(validation, SplitLabel::Validation),
        test: BarSeries::from_sorted_unchecked(test, SplitLabel::Test),
        dropped,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::Bar;
    use proptest::prelude::*;

    fn minute(y: i32, m: u32, d: u32) -> i64 {
        day_number(NaiveDate::from_ymd_opt(y, m, d).unwrap()) * MINUTES_PER_DAY
    }

    fn series_at(ts: &[i64]) -> BarSeries {
        let bars = ts
            .iter()
            .map(|&t| Bar::new(t, 1.0, 1.0, 1.0, 1.0, 0.0).unwrap())
            .collect();
        BarSeries::new(bars, SplitLabel::Full).unwrap()
    }

    #[test]
    fn default_windows_cover_calendar_years() {
        let spec = SplitSpec::default();
        assert_eq!(spec.days(SplitLabel::Validation), Some(366));
        assert_eq!(spec.days(SplitLabel::Test), Some(283));
        let ts = [
            minute(2021, 12, 31),
            minute(2022, 1, 1),
            minute(2023, 12, 31) + 1439,
            minute(2024, 1, 1),
            minute(2024, 12, 31) + 1439,
            minute(2025, 1, 1),
            minute(2025, 10, 10) + 1439,
            minute(2025, 10, 11),
        ];
        let out = split(&series_at(&ts), &spec).unwrap();
        assert_eq!(out.train.len(), 2);
        assert_eq!(out.validation.len(), 2);
        assert_eq!(out.test.len(), 2);
        assert_eq!(out.dropped, 2);
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn boundary_bar_goes_to_validation() {
        let out = split(&series_at(&[minute(2024, 1, 1)]), &SplitSpec::default()).unwrap();
        assert_eq!(out.validation.len(), 1);
        assert_eq!(out.train.len(), 0);
    }

    #[test]
    fn degenerate_split_is_flagged() {
        let ts: Vec<i64> = (0..10).map(|i| minute(2024, 6, 1) + i).collect();
        let out = split(&series_at(&ts), &SplitSpec::default()).unwrap();
        assert_eq!(out.validation.len(), 10);
        assert!(out.train.is_empty() && out.test.is_empty());
        assert_eq!(out.warnings.len(), 2);
    }

    #[test]
    fn overlapping_spec_rejected() {
        let mut spec = SplitSpec::default();
        spec.val_start = spec.train_end;
        assert!(split(&series_at(&[0]), &spec).is_err());
    }

    #[test]
    fn fractions_cover_whole_days() {
        let ts: Vec<i64> = (0..10 * MINUTES_PER_DAY).step_by(60).collect();
        let series = series_at(&ts);
        let spec = SplitSpec::by_fractions(&series, 0.6, 0.2).unwrap();
        let out = split(&series, &spec).unwrap();
        assert_eq!(out.dropped, 0);
        assert_eq!(out.train.len(), 6 * 24);
        assert_eq!(out.validation.len(), 2 * 24);
        assert_eq!(out.test.len(), 2 * 24);
    }

    proptest! {
        #[test]
        fn split_is_a_partition(offsets in proptest::collection::btree_set(0i64..5_000_000, 1..200)) {
            let base = minute(2021, 6, 1);
            let ts: Vec<i64> = offsets.iter().map(|o| base + o * 600).collect();
            let series = series_at(&ts);
            let out = split(&series, &SplitSpec::default()).unwrap();
            prop_assert_eq!(out.train.len() + out.validation.len() + out.test.len() + out.dropped, series.len());
            let mut seen: Vec<i64> = out.train.timestamps();
            seen.extend(out.validation.timestamps());
            seen.extend(out.test.timestamps());
            let n = seen.len();
            seen.sort();
            seen.dedup();
            prop_assert_eq!(seen.len(), n);
        }
    }
}
