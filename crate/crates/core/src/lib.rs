//! Backtesting and strategy-optimization workbench for minute-bar passive execution.
//!
//! The crate is organised bottom-up:
//!
//! - [`market_data`]: OHLCV bars, CSV ingestion, chronological splits, synthetic data.
//! - [`impact`]: propagator market-impact model charged against trade logs.
//! - [`simulator`]: one-order-at-a-time passive execution loop and the PnL ledger.
//! - [`forecaster`]: EMA features, ridge alpha model, prediction-quality scoring,
//!   greedy feature selection.
//! - [`strategy`]: the baseline passive executor driven by a [`Genome`].
//! - [`calibration`]: tree-structured Parzen estimator search.
//! - [`evolution`]: MAP-Elites grid, island model, elite archive, mutators.
//! - [`stats`]: performance metrics and the overfitting-validation suite.
//! - [`eval`]: glue that scores a genome on prepared data splits.
//!
//! Data-parallel loops go through [`par`], which falls back to sequential
//! execution when the `parallel` feature is disabled.

// Validation guards are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod eval;
pub mod evolution;
pub mod forecaster;
pub mod genome;
pub mod impact;
pub mod market_data;
pub mod par;
pub mod simulator;
pub mod stats;
pub mod strategy;

pub use genome::Genome;
pub use par::Jobs;
