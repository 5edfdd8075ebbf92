//! Scores a strategy genome on prepared splits.
//!
//! Alpha is predicted once per split with a forecaster fitted on the training
//! split; every evaluation then only replays the simulator.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forecaster::{AlphaSeries, ForecastError, Forecaster, ForecasterConfig};
use crate::genome::Genome;
use crate::impact::ImpactParams;
use crate::market_data::{BarSeries, SplitLabel, SplitResult};
use crate::par::Jobs;
use crate::simulator::{run_backtest, Ledger, LedgerTotals, SimConfig, SimError};
use crate::stats::{perf_metrics, DailyPnlSeries, PerfMetrics};
use crate::strategy::BaselineStrategy;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("split {0} is empty or missing")]
    MissingSplit(&'static str),
    #[error("invalid genome: {0}")]
    Genome(String),
    #[error(transparent)]
    Forecast(#[from] ForecastError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedSplit {
    pub series: BarSeries,
    pub alpha: AlphaSeries,
}

/// Fitness plus the metrics bundle for one genome on one split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub split: SplitLabel,
    /// Total impact-adjusted PnL.
    pub fitness: f64,
    pub totals: LedgerTotals,
    /// `None` for splits shorter than two days.
    pub metrics: Option<PerfMetrics>,
    pub n_days: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestEvaluator {
    pub forecaster: Forecaster,
    pub validation: PreparedSplit,
    pub test: Option<PreparedSplit>,
    pub sim: SimConfig,
    pub impact: ImpactParams,
    /// Keys not present in an evaluated genome fall back to these.
    pub base: Genome,
    /// Parallelism inside one backtest (impact charge); keep sequential when
    /// evaluations themselves run in parallel.
    pub inner_jobs: Jobs,
}

impl BacktestEvaluator {
    pub fn prepare(
        splits: &SplitResult,
        forecaster_cfg: &ForecasterConfig,
        sim: SimConfig,
        impact: ImpactParams,
        base: Genome,
    ) -> Result<Self, EvalError> {
        let train = non_empty(&splits.train, "train")?;
        let forecaster = Forecaster::fit(train, forecaster_cfg)?;
        let prep = |s: &BarSeries| -> Result<PreparedSplit, EvalError> {
            Ok(PreparedSplit {
                alpha: forecaster.predict(s)?,
                series: s.clone(),
            })
        };
        let validation = prep(non_empty(&splits.validation, "validation")?)?;
        let test = if splits.test.len() >= 2 {
            Some(prep(&splits.test)?)
        } else {
            None
        };
        Ok(BacktestEvaluator {
            forecaster,
            validation,
            test,
            sim,
            impact,
            base,
            inner_jobs: Jobs::SEQUENTIAL,
        })
    }

    pub fn split(&self, label: SplitLabel) -> Option<&PreparedSplit> {
        match label {
            SplitLabel::Validation => Some(&self.validation),
            SplitLabel::Test => self.test.as_ref(),
            _ => None,
        }
    }

    pub fn ledger(&self, genome: &Genome, label: SplitLabel) -> Result<Ledger, EvalError> {
        let prepared = self
            .split(label)
            .ok_or(EvalError::MissingSplit(label.as_str()))?;
        let strategy =
            BaselineStrategy::from_genome(&self.base.merged(genome)).map_err(EvalError::Genome)?;
        Ok(run_backtest(
            &prepared.series,
            &strategy,
            &prepared.alpha,
            &self.sim,
            &self.impact,
            self.inner_jobs,
        )?)
    }

    pub fn evaluate(&self, genome: &Genome, label: SplitLabel) -> Result<EvalResult, EvalError> {
        let ledger = self.ledger(genome, label)?;
        let daily = DailyPnlSeries::from_ledger(&ledger);
        let totals = ledger.totals();
        Ok(EvalResult {
            split: label,
            fitness: totals.pnl_adj,
            totals,
            metrics: perf_metrics(&daily).ok(),
            n_days: daily.len(),
        })
    }
}

fn non_empty<'a>(s: &'a BarSeries, name: &'static str) -> Result<&'a BarSeries, EvalError> {
    if s.len() < 2 {
        Err(EvalError::MissingSplit(name))
    } else {
        Ok(s)
    }
}

impl crate::evolution::Evaluator for BacktestEvaluator {
    fn fitness(&self, genome: &Genome, _program: Option<&str>) -> Result<f64, String> {
        self.evaluate(genome, SplitLabel::Validation)
            .map(|r| r.fitness)
            .map_err(|e| e.to_string())
    }

    fn oos_fitness(&self, genome: &Genome, _program: Option<&str>) -> Option<Result<f64, String>> {
        self.test.as_ref()?;
        Some(
            self.evaluate(genome, SplitLabel::Test)
                .map(|r| r.fitness)
                .map_err(|e| e.to_string()),
        )
    }
}
