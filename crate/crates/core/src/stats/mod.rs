//! Performance metrics and overfitting checks.
//!
//! Sharpe, Sortino and Calmar are computed on daily dollar PnL and annualized
//! with √365 / 365 (crypto trades every calendar day):
//!
//! - sharpe  = mean(d) / std(d, ddof=1) · √365
//! - sortino = mean(d) / √(mean(min(d, 0)²)) · √365
//! - calmar  = 365 · mean(d) / |max drawdown|

mod daily;
mod metrics;
mod report;
mod validation;

pub use daily::DailyPnlSeries;
pub use metrics::{
    max_drawdown, perf_metrics, perf_metrics_annualized, PerfMetrics, DAYS_PER_YEAR,
};
pub use report::{AnalysisReport, NullBlock, SHARPE_CONVENTION};
pub use validation::{
    is_oos_curve, phacking_ceiling, sizing_counterfactual, z_excess, CurvePoint, IsOosCurve,
    NullModel, SizingDecomposition,
};

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StatsError {
    #[error("need at least 2 days, got {0}")]
    TooFewDays(usize),
    #[error("null model needs a positive baseline Sharpe, got {0}")]
    NonPositiveSharpe(f64),
    #[error("invalid input: {0}")]
    Invalid(String),
}
