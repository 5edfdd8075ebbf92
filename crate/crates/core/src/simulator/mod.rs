//! Minute-bar passive execution simulator.
//!
//! Each interval: check the resting order against the bar, update the
//! position, cancel, ask the strategy for a new order, apply the
//! non-evolvable order constraints, submit, and record a ledger row. Only one
//! order rests at any time.

mod engine;
mod ledger;

pub use engine::{check_fill, constrain_order, run_backtest, step, Signal, StepOutput};
pub use ledger::{Ledger, LedgerRow, LedgerTotals};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forecaster::ForecastError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Buy,
    Sell,
}

/// A passive limit order. `qty_btc` is signed: positive buys, negative sells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderIntent {
    pub side: Side,
    pub limit_price: f64,
    pub qty_btc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fill {
    pub qty_btc: f64,
    pub price: f64,
    pub timestamp: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub hit_ratio: f64,
    pub fee_rate: f64,
    pub max_limit_order_usd: f64,
    /// Bars by which the strategy's book view (mid and alpha) lags the market.
    pub data_lag_minutes: u32,
    pub initial_position_btc: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            hit_ratio: 1.0,
            fee_rate: 0.00015,
            max_limit_order_usd: 100_000.0,
            data_lag_minutes: 0,
            initial_position_btc: 0.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(0.0..=1.0).contains(&self.hit_ratio) {
            return Err(SimError::Config(format!(
                "hit_ratio {} outside [0, 1]",
                self.hit_ratio
            )));
        }
        if !(self.fee_rate >= 0.0 && self.fee_rate.is_finite()) {
            return Err(SimError::Config(format!(
                "fee_rate {} must be >= 0",
                self.fee_rate
            )));
        }
        if !(self.max_limit_order_usd > 0.0) {
            return Err(SimError::Config(
                "max_limit_order_usd must be positive".into(),
            ));
        }
        if !self.initial_position_btc.is_finite() {
            return Err(SimError::Config("initial position must be finite".into()));
        }
        Ok(())
    }
}

/// Position and prices carried between intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PortfolioState {
    pub position_btc: f64,
    pub mid: f64,
    pub mid_book: f64,
    pub data_lag_minutes: f64,
}

/// Everything a strategy sees when deciding on an order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyState {
    pub timestamp: i64,
    pub alpha: f64,
    pub alpha_sd: f64,
    pub mid: f64,
    pub mid_book: f64,
    pub position_btc: f64,
    pub data_lag_minutes: f64,
}

/// Per-run scratch space a strategy may use to carry state (EMAs, counters)
/// across intervals. Fresh for every backtest.
pub type StateExt = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StrategyOutput {
    pub order: Option<OrderIntent>,
    /// Desired position after this interval; used for the target-PnL stream.
    pub target_position_btc: Option<f64>,
}

#[derive(Debug, Clone, Error, PartialEq)]
#[error("{0}")]
pub struct StrategyError(pub String);

pub trait Strategy: Sync {
    fn decide(
        &self,
        state: &StrategyState,
        ext: &mut StateExt,
    ) -> Result<StrategyOutput, StrategyError>;
}

impl<F> Strategy for F
where
    F: Fn(&StrategyState, &mut StateExt) -> Result<StrategyOutput, StrategyError> + Sync,
{
    fn decide(
        &self,
        state: &StrategyState,
        ext: &mut StateExt,
    ) -> Result<StrategyOutput, StrategyError> {
        self(state, ext)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("series needs at least 2 bars, got {0}")]
    TooShort(usize),
    #[error("strategy failed at minute {timestamp}: {message}")]
    Strategy { timestamp: i64, message: String },
    #[error(transparent)]
    Forecast(#[from] ForecastError),
    #[error("invalid simulator config: {0}")]
    Config(String),
}
