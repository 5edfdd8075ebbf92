//! Baseline alpha forecaster: EMA return features, multi-horizon ridge,
//! prediction-quality scoring and greedy feature selection.

mod features;
mod metrics;
mod ridge;
mod select;

pub use features::{
    calcset, default_calcset, ema_adjusted, pct_returns, CalcsetConfig, EmaStyle, FeatureMatrix,
};
pub use metrics::{
    average_ranks, composite_score, pearson, r2_no_intercept, score_forecast, spearman,
    ForecastMetrics,
};
pub use ridge::{
    fit_ridge, forward_returns, ridge_solve, ReturnKind, RidgeModel, DEFAULT_HORIZONS,
    DEFAULT_LAMBDA, PRIMARY_HORIZON,
};
pub use select::{greedy_select, DEFAULT_CORR_CAP, DEFAULT_MAX_FEATURES};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market_data::BarSeries;

#[derive(Debug, Error, PartialEq)]
pub enum ForecastError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("feature columns do not match the model: {0}")]
    ColumnMismatch(String),
    #[error("normal equations are singular")]
    Singular,
    #[error("invalid forecaster configuration: {0}")]
    Config(String),
    #[error("model file: {0}")]
    Serde(String),
}

/// Alpha predictions for each horizon plus the train-split scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaSeries {
    pub timestamps: Vec<i64>,
    pub horizons: Vec<usize>,
    pub values: Vec<Vec<f64>>,
    /// Frozen from the training fit; never recomputed on other splits.
    pub alpha_sd: f64,
    pub primary_horizon: usize,
}

impl AlphaSeries {
    pub fn horizon(&self, h: usize) -> Option<&[f64]> {
        self.horizons
            .iter()
            .position(|&x| x == h)
            .map(|i| self.values[i].as_slice())
    }

    /// The column that drives trading and scoring.
    pub fn primary(&self) -> &[f64] {
        self.horizon(self.primary_horizon)
            .expect("primary horizon present")
    }
}

pub fn predict_alpha(model: &RidgeModel, x: &FeatureMatrix) -> Result<AlphaSeries, ForecastError> {
    Ok(AlphaSeries {
        timestamps: x.timestamps.clone(),
        horizons: model.horizons.clone(),
        values: model.predict_matrix(x)?,
        alpha_sd: model.alpha_sd,
        primary_horizon: model.primary_horizon,
    })
}

/// The primary alpha column and its scale for one series.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimaryAlpha {
    pub values: Vec<f64>,
    pub alpha_sd: f64,
}

/// Anything that can produce an alpha column aligned with a bar series.
pub trait AlphaSource: Sync {
    fn primary_alpha(&self, series: &BarSeries) -> Result<PrimaryAlpha, ForecastError>;
}

impl AlphaSource for AlphaSeries {
    fn primary_alpha(&self, series: &BarSeries) -> Result<PrimaryAlpha, ForecastError> {
        if self.timestamps.len() != series.len()
            || self.timestamps.first() != series.bars().first().map(|b| &b.timestamp)
        {
            return Err(ForecastError::Shape(
                "alpha series not aligned with bars".into(),
            ));
        }
        Ok(PrimaryAlpha {
            values: self.primary().to_vec(),
            alpha_sd: self.alpha_sd,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForecasterConfig {
    pub calcset: CalcsetConfig,
    pub lambda: f64,
    pub horizons: Vec<usize>,
    pub target_kind: ReturnKind,
    /// Restrict the fitted model to these columns (e.g. a greedy selection).
    pub features: Option<Vec<String>>,
}

impl Default for ForecasterConfig {
    fn default() -> Self {
        ForecasterConfig {
            calcset: CalcsetConfig::default(),
            lambda: DEFAULT_LAMBDA,
            horizons: DEFAULT_HORIZONS.to_vec(),
            target_kind: ReturnKind::Pct,
            features: None,
        }
    }
}

/// Feature pipeline plus fitted model; serializes to the model JSON format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecaster {
    pub calcset: CalcsetConfig,
    pub model: RidgeModel,
}

impl Forecaster {
    pub fn fit(train: &BarSeries, cfg: &ForecasterConfig) -> Result<Self, ForecastError> {
        let mut x = calcset(train, &cfg.calcset)?;
        if let Some(names) = &cfg.features {
            x = x.select(names)?;
        }
        let model = fit_ridge(&x, train, cfg.lambda, &cfg.horizons, cfg.target_kind)?;
        Ok(Forecaster {
            calcset: cfg.calcset.clone(),
            model,
        })
    }

    pub fn features(&self, series: &BarSeries) -> Result<FeatureMatrix, ForecastError> {
        calcset(series, &self.calcset)?.select(&self.model.feature_names)
    }

    pub fn predict(&self, series: &BarSeries) -> Result<AlphaSeries, ForecastError> {
        predict_alpha(&self.model, &self.features(series)?)
    }

    /// Scores the primary horizon against realized forward returns on `series`.
    pub fn score(&self, series: &BarSeries) -> Result<ForecastMetrics, ForecastError> {
        let alpha = self.predict(series)?;
        let realized = forward_returns(
            &series.closes(),
            self.model.primary_horizon,
            self.model.target_kind,
        );
        score_forecast(alpha.primary(), &realized, &series.days())
    }

    pub fn to_json(&self) -> Result<String, ForecastError> {
        serde_json::to_string_pretty(self).map_err(|e| ForecastError::Serde(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, ForecastError> {
        let f: Forecaster =
            serde_json::from_str(text).map_err(|e| ForecastError::Serde(e.to_string()))?;
        if f.model.weights.len() != f.model.feature_names.len()
            || f.model
                .weights
                .iter()
                .any(|w| w.len() != f.model.horizons.len())
            || !f.model.horizons.contains(&f.model.primary_horizon)
        {
            return Err(ForecastError::Serde("inconsistent weight matrix".into()));
        }
        Ok(f)
    }
}

impl AlphaSource for Forecaster {
    fn primary_alpha(&self, series: &BarSeries) -> Result<PrimaryAlpha, ForecastError> {
        let alpha = self.predict(series)?;
        Ok(PrimaryAlpha {
            values: alpha.primary().to_vec(),
            alpha_sd: alpha.alpha_sd,
        })
    }
}
