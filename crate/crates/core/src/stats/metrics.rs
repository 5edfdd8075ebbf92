use serde::{Deserialize, Serialize};

use super::{DailyPnlSeries, StatsError};

pub const DAYS_PER_YEAR: f64 = 365.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerfMetrics {
    pub sharpe: f64,
    /// False when daily PnL has zero variance; `sharpe` is then ±∞ (or 0 for
    /// an all-zero series).
    pub sharpe_defined: bool,
    pub sortino: f64,
    pub calmar: f64,
    /// Most negative peak-to-trough move of cumulative `pnl_adj` (≤ 0).
    pub max_drawdown: f64,
    /// Fraction of days with positive `pnl_adj`.
    pub win_rate: f64,
    /// Fraction of fills whose interval had positive `pnl_adj`.
    pub trade_win_rate: Option<f64>,
    pub total_pnl_adj: f64,
    pub total_pnl_net: f64,
    pub total_frictionless: f64,
    pub total_impact: f64,
    pub volume_usd: f64,
    pub impact_bps: f64,
    pub n_days: usize,
}

/// Most negative drawdown of a cumulative path that starts at 0.
pub fn max_drawdown(cumulative: &[f64]) -> f64 {
    let mut peak = 0.0f64;
    let mut worst = 0.0f64;
    for &c in cumulative {
        peak = peak.max(c);
        worst = worst.min(c - peak);
    }
    worst
}

/// `num / den`, mapping a zero denominator to ±∞ (or 0 when `num` is 0).
fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num == 0.0 {
        0.0
    } else {
        num.signum() * f64::INFINITY
    }
}

pub fn perf_metrics(daily: &DailyPnlSeries) -> Result<PerfMetrics, StatsError> {
    perf_metrics_annualized(daily, DAYS_PER_YEAR)
}

pub fn perf_metrics_annualized(
    daily: &DailyPnlSeries,
    periods_per_year: f64,
) -> Result<PerfMetrics, StatsError> {
    let n = daily.len();
    if n < 2 {
        return Err(StatsError::TooFewDays(n));
    }
    if daily.pnl_adj.iter().any(|x| !x.is_finite()) {
        return Err(StatsError::Invalid("daily pnl must be finite".into()));
    }

    // Ratios are computed on the series divided by its largest magnitude, which
    // makes them exactly invariant under rescaling of the inputs.
    let scale = daily.pnl_adj.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let unit: Vec<f64> = if scale > 0.0 {
        daily.pnl_adj.iter().map(|x| x / scale).collect()
    } else {
        vec![0.0; n]
    };
    let nf = n as f64;
    let mean = unit.iter().sum::<f64>() / nf;
    let var = unit.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let downside = (unit.iter().map(|x| x.min(0.0).powi(2)).sum::<f64>() / nf).sqrt();
    let mut cum = 0.0;
    let path: Vec<f64> = unit
        .iter()
        .map(|x| {
            cum += x;
            cum
        })
        .collect();
    let dd_unit = max_drawdown(&path);

    let sharpe_defined = var > 0.0;
    if !sharpe_defined {
        log::warn!("daily pnl has zero variance; Sharpe undefined");
    }
    let sharpe = ratio(mean, var.sqrt()) * periods_per_year.sqrt();
    let sortino = ratio(mean, downside) * periods_per_year.sqrt();
    let calmar = ratio(mean * periods_per_year, dd_unit.abs());

    let total = |v: &[f64]| v.iter().sum::<f64>();
    let mut raw_cum = 0.0;
    let raw_path: Vec<f64> = daily
        .pnl_adj
        .iter()
        .map(|x| {
            raw_cum += x;
            raw_cum
        })
        .collect();
    let volume = total(&daily.volume_usd);
    let impact = total(&daily.impact);
    Ok(PerfMetrics {
        sharpe,
        sharpe_defined,
        sortino,
        calmar,
        max_drawdown: max_drawdown(&raw_path),
        win_rate: unit.iter().filter(|x| **x > 0.0).count() as f64 / nf,
        trade_win_rate: (daily.fills > 0).then(|| daily.winning_fills as f64 / daily.fills as f64),
        total_pnl_adj: total(&daily.pnl_adj),
        total_pnl_net: total(&daily.pnl_net),
        total_frictionless: total(&daily.frictionless),
        total_impact: impact,
        volume_usd: volume,
        impact_bps: if volume > 0.0 {
            impact / volume * 1e4
        } else {
            0.0
        },
        n_days: n,
    })
}
