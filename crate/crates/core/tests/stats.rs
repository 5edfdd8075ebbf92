mod common;

use approx::assert_relative_eq;
use quantevo_core::market_data::SplitLabel;
use quantevo_core::stats::{perf_metrics, AnalysisReport, DailyPnlSeries, SizingDecomposition};
use quantevo_core::strategy::StrategyParams;

#[test]
fn daily_series_reconciles_with_ledger_totals() {
    let ev = common::fixture_evaluator();
    let ledger = ev
        .ledger(
            &StrategyParams::default().to_genome(),
            SplitLabel::Validation,
        )
        .unwrap();
    let totals = ledger.totals();
    let daily = DailyPnlSeries::from_ledger(&ledger);
    assert_eq!(daily.len(), 2);
    let sum = |v: &[f64]| v.iter().sum::<f64>();
    assert_relative_eq!(sum(&daily.pnl_adj), totals.pnl_adj, epsilon = 1e-6);
    assert_relative_eq!(sum(&daily.pnl_net), totals.pnl_net, epsilon = 1e-6);
    assert_relative_eq!(sum(&daily.frictionless), totals.pnl_pos, epsilon = 1e-6);
    assert_relative_eq!(sum(&daily.impact), totals.impact_cost, epsilon = 1e-6);
    assert_relative_eq!(
        sum(&daily.volume_usd),
        totals.traded_notional,
        epsilon = 1e-6
    );
    assert_eq!(daily.fills, totals.trades);

    let m = perf_metrics(&daily).unwrap();
    assert_relative_eq!(m.total_pnl_adj, totals.pnl_adj, epsilon = 1e-6);
    assert_relative_eq!(
        m.impact_bps,
        totals.impact_cost / totals.traded_notional * 1e4,
        max_relative = 1e-9
    );
}

#[test]
fn report_serializes_with_convention_note() {
    let mut report = AnalysisReport::new();
    let s = SizingDecomposition::new(100.0, 10.0, 1e6, 500.0, 4e6).unwrap();
    assert_eq!(s.k, 4.0);
    assert_relative_eq!(s.counterfactual, 400.0 - 80.0);
    report.sizing.insert("validation".into(), s);
    let json: serde_json::Value = serde_json::from_str(&report.to_json().unwrap()).unwrap();
    assert!(json["sharpe_convention"].as_str().unwrap().contains("365"));
    assert_eq!(json["sizing"]["validation"]["k"], 4.0);
}
