use serde::{Deserialize, Serialize};

use super::ForecastError;
use crate::market_data::BarSeries;

/// Column-major feature table aligned to bar timestamps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub timestamps: Vec<i64>,
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl FeatureMatrix {
    pub fn new(timestamps: Vec<i64>) -> Self {
        FeatureMatrix {
            timestamps,
            names: Vec::new(),
            columns: Vec::new(),
        }
    }

    /// Adds a column, replacing NaN and infinities with zero.
    pub fn push_column(
        &mut self,
        name: impl Into<String>,
        mut values: Vec<f64>,
    ) -> Result<(), ForecastError> {
        if values.len() != self.timestamps.len() {
            return Err(ForecastError::Shape(format!(
                "column has {} rows, matrix has {}",
                values.len(),
                self.timestamps.len()
            )));
        }
        for v in values.iter_mut() {
            if !v.is_finite() {
                *v = 0.0;
            }
        }
        self.names.push(name.into());
        self.columns.push(values);
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.timestamps.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// Keeps the named columns in the given order.
    pub fn select(&self, names: &[String]) -> Result<FeatureMatrix, ForecastError> {
        let mut out = FeatureMatrix::new(self.timestamps.clone());
        for name in names {
            let col = self
                .column(name)
                .ok_or_else(|| ForecastError::ColumnMismatch(format!("no column `{name}`")))?;
            out.push_column(name.clone(), col.to_vec())?;
        }
        Ok(out)
    }

    /// First `n` rows.
    pub fn head(&self, n: usize) -> FeatureMatrix {
        let n = n.min(self.n_rows());
        FeatureMatrix {
            timestamps: self.timestamps[..n].to_vec(),
            names: self.names.clone(),
            columns: self.columns.iter().map(|c| c[..n].to_vec()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmaStyle {
    /// `a = 2 / (span + 1)`.
    Span,
    /// `a = 1 - 0.5^(1 / halflife)`.
    Halflife,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CalcsetConfig {
    pub windows: Vec<f64>,
    pub style: EmaStyle,
    /// Subtract the expanding mean of returns before smoothing.
    pub demean: bool,
}

impl Default for CalcsetConfig {
    fn default() -> Self {
        CalcsetConfig {
            windows: vec![1.0, 5.0, 10.0],
            style: EmaStyle::Span,
            demean: false,
        }
    }
}

/// One-step close-to-close percent returns; the first entry is NaN.
pub fn pct_returns(closes: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(closes.len());
    if !closes.is_empty() {
        out.push(f64::NAN);
    }
    out.extend(closes.windows(2).map(|w| w[1] / w[0] - 1.0));
    out
}

/// Bias-adjusted EMA (`adjust=True` weighting). NaN inputs before the first
/// observation yield NaN; later NaNs carry the previous value forward.
pub fn ema_adjusted(values: &[f64], smoothing: f64) -> Vec<f64> {
    let decay = 1.0 - smoothing;
    let mut num = 0.0;
    let mut den = 0.0;
    let mut started = false;
    values
        .iter()
        .map(|&x| {
            if x.is_nan() {
                if started {
                    num *= decay;
                    den *= decay;
                    return num / den;
                }
                return f64::NAN;
            }
            started = true;
            num = x + decay * num;
            den = 1.0 + decay * den;
            num / den
        })
        .collect()
}

fn smoothing(window: f64, style: EmaStyle) -> f64 {
    match style {
        EmaStyle::Span => 2.0 / (window + 1.0),
        EmaStyle::Halflife => 1.0 - 0.5f64.powf(1.0 / window),
    }
}

fn column_name(window: f64, style: EmaStyle) -> String {
    let w = if window.fract() == 0.0 {
        format!("{}", window as i64)
    } else {
        format!("{window}")
    };
    match style {
        EmaStyle::Span => format!("ema_ret_{w}"),
        EmaStyle::Halflife => format!("ema_hl_ret_{w}"),
    }
}

/// EMA return features for a configurable set of windows. Causal: row `t`
/// depends only on bars `0..=t`.
pub fn calcset(series: &BarSeries, cfg: &CalcsetConfig) -> Result<FeatureMatrix, ForecastError> {
    if series.len() < 2 {
        return Err(ForecastError::Shape("need at least 2 bars".into()));
    }
    let mut returns = pct_returns(&series.closes());
    if cfg.demean {
        let mut sum = 0.0;
        let mut n = 0.0;
        for r in returns.iter_mut().filter(|r| !r.is_nan()) {
            sum += *r;
            n += 1.0;
            *r -= sum / n;
        }
    }
    let mut fm = FeatureMatrix::new(series.timestamps());
    for &w in &cfg.windows {
        if !(w >= 1.0 || (cfg.style == EmaStyle::Halflife && w > 0.0)) {
            return Err(ForecastError::Config(format!("invalid EMA window {w}")));
        }
        fm.push_column(
            column_name(w, cfg.style),
            ema_adjusted(&returns, smoothing(w, cfg.style)),
        )?;
    }
    Ok(fm)
}

/// EMA of percent returns at spans 1, 5 and 10, missing values set to zero.
pub fn default_calcset(series: &BarSeries) -> Result<FeatureMatrix, ForecastError> {
    calcset(series, &CalcsetConfig::default())
}
