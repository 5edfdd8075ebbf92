//! Frozen fixtures for the acceptance suite in `tests/acceptance.rs`.
//!
//! Run the suite with
//! `cargo test -p quantevo-verification --test acceptance -- --nocapture --test-threads 1`
//! to see one `[PASS]`/`[FAIL]` line per criterion.

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
    let series = synthesize(&fixture_spec()).expect("valid synthetic spec");
    let spec = SplitSpec::by_fractions(&series, 8.0 / 12.0, 2.0 / 12.0).expect("12 days split");
    split(&series, &spec).expect("split")
}

/// Baseline-genome evaluator on the frozen fixture.
pub fn fixture_evaluator() -> BacktestEvaluator {
    BacktestEvaluator::prepare(
        &fixture_splits(),
        &ForecasterConfig::default(),
        SimConfig::default(),
        ImpactParams::default(),
        StrategyParams::default().to_genome(),
    )
    .expect("fixture prepares")
}

/// Prints one result line and panics if `ok` is false.
pub fn verdict(id: &str, title: &str, ok: bool, detail: String) {
    println!(
        "[{}] {id}. {title} :: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {id} failed: {detail}");
}
