#![allow(dead_code)]

use quantevo_core::eval::BacktestEvaluator;
use quantevo_core::forecaster::ForecasterConfig;
use quantevo_core::impact::ImpactParams;
use quantevo_core::market_data::{split, synthesize, SplitResult, SplitSpec, SynthSpec};
use quantevo_core::simulator::SimConfig;
use quantevo_core::strategy::StrategyParams;

/// Signal-bearing synthetic market (signal amplitude half the per-minute
/// noise), 12 days: 8 train, 2 validation, 2 test.
pub fn fixture_spec() -> SynthSpec {
    SynthSpec {
        seed: 7,
        n_minutes: 12 * 1440,
        signal_coef: 2.5e-4,
        ..Default::default()
    }
}

pub fn fixture_splits() -> SplitResult {
    let series = synthesize(&fixture_spec()).unwrap();
    let spec = SplitSpec::by_fractions(&series, 8.0 / 12.0, 2.0 / 12.0).unwrap();
    split(&series, &spec).unwrap()
}

pub fn fixture_evaluator() -> BacktestEvaluator {
    BacktestEvaluator::prepare(
        &fixture_splits(),
        &ForecasterConfig::default(),
        SimConfig::default(),
        ImpactParams::default(),
        StrategyParams::default().to_genome(),
    )
    .unwrap()
}
