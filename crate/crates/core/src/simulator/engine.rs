use super::{
    Fill, Ledger, LedgerRow, OrderIntent, PortfolioState, Side, SimConfig, SimError, StateExt,
    Strategy, StrategyState,
};
use crate::forecaster::AlphaSource;
use crate::impact::{charge, ImpactParams, Trade, TradeLog};
use crate::market_data::{Bar, BarSeries};
use crate::par::Jobs;

/// Buy fills when the bar trades strictly below the limit, sell when strictly
/// above. Fills execute at the limit price for `qty * hit_ratio`.
pub fn check_fill(order: &OrderIntent, bar: &Bar, hit_ratio: f64) -> Option<Fill> {
    if !(order.limit_price > 0.0) {
        return None;
    }
    let touched = match order.side {
        Side::Buy => bar.low < order.limit_price,
        Side::Sell => bar.high > order.limit_price,
    };
    let qty = order.qty_btc * hit_ratio;
    (touched && qty != 0.0).then_some(Fill {
        qty_btc: qty,
        price: order.limit_price,
        timestamp: bar.timestamp,
    })
}

/// Forces the quantity sign to match the side and caps notional at
/// `max_limit_order_usd`.
pub fn constrain_order(order: OrderIntent, mid_book: f64, config: &SimConfig) -> OrderIntent {
    let mut qty = match order.side {
        Side::Buy => order.qty_btc.abs(),
        Side::Sell => -order.qty_btc.abs(),
    };
    if (qty * mid_book).abs() > config.max_limit_order_usd {
        qty = config.max_limit_order_usd / mid_book * qty.signum();
    }
    OrderIntent {
        qty_btc: qty,
        ..order
    }
}

/// Alpha and its normalisation for one decision point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Signal {
    pub alpha: f64,
    pub alpha_sd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    /// Impact fields are zero until the run's trade log is charged.
    pub row: LedgerRow,
    pub state: PortfolioState,
    pub pending: Option<OrderIntent>,
}

/// One interval of the order lifecycle. `state.mid_book` and
/// `state.data_lag_minutes` carry the strategy's (possibly stale) book view
/// for `bar_t`; `state.mid` is overwritten with `bar_t.close`.
#[allow(clippy::too_many_arguments)]
pub fn step(
    state: &PortfolioState,
    signal: Signal,
    bar_t: &Bar,
    bar_next: &Bar,
    pending: Option<&OrderIntent>,
    strategy: &dyn Strategy,
    config: &SimConfig,
    ext: &mut StateExt,
) -> Result<StepOutput, SimError> {
    let fill = pending.and_then(|o| check_fill(o, bar_t, config.hit_ratio));
    let fill_qty = fill.map_or(0.0, |f| f.qty_btc);
    let position = state.position_btc + fill_qty;
    let mid = bar_t.close;

    let view = StrategyState {
        timestamp: bar_t.timestamp,
        alpha: signal.alpha,
        alpha_sd: signal.alpha_sd,
        mid,
        mid_book: state.mid_book,
        position_btc: position,
        data_lag_minutes: state.data_lag_minutes,
    };
    let out = strategy
        .decide(&view, ext)
        .map_err(|e| SimError::Strategy {
            timestamp: bar_t.timestamp,
            message: e.0,
        })?;
    let order = out
        .order
        .map(|o| constrain_order(o, state.mid_book, config))
        .filter(|o| o.limit_price.is_finite() && o.limit_price > 0.0 && o.qty_btc.is_finite());
    let target = out.target_position_btc.unwrap_or(position);

    let mid_move = bar_next.close - mid;
    let pnl_pos = position * mid_move;
    let pnl_net = match fill {
        Some(f) => pnl_pos - (f.price - mid) * f.qty_btc - config.fee_rate * mid * f.qty_btc.abs(),
        None => pnl_pos,
    };
    let row = LedgerRow {
        timestamp: bar_t.timestamp,
        mid,
        position_after: position,
        mid_move,
        pnl_pos,
        pnl_target: target * mid_move,
        pnl_net,
        pnl_adj: pnl_net,
        impact_cost: 0.0,
        fill,
        target_position_btc: target,
        order,
    };
    Ok(StepOutput {
        row,
        state: PortfolioState {
            position_btc: position,
            mid,
            ..*state
        },
        pending: order,
    })
}

/// Replays `series` through the strategy and charges market impact on the
/// resulting fills. The final bar only supplies the last price move.
pub fn run_backtest(
    series: &BarSeries,
    strategy: &dyn Strategy,
    alpha: &dyn AlphaSource,
    config: &SimConfig,
    impact: &ImpactParams,
    jobs: Jobs,
) -> Result<Ledger, SimError> {
    config.validate()?;
    let bars = series.bars();
    if bars.len() < 2 {
        return Err(SimError::TooShort(bars.len()));
    }
    let signal = alpha.primary_alpha(series)?;
    let lag = config.data_lag_minutes as usize;

    let mut ext = StateExt::new();
    let mut state = PortfolioState {
        position_btc: config.initial_position_btc,
        mid: bars[0].close,
        mid_book: bars[0].close,
        data_lag_minutes: 0.0,
    };
    let mut pending: Option<OrderIntent> = None;
    let mut rows = Vec::with_capacity(bars.len() - 1);
    for t in 0..bars.len() - 1 {
        let seen = t.saturating_sub(lag);
        state.mid_book = bars[seen].close;
        state.data_lag_minutes = (t - seen) as f64;
        let sig = Signal {
            alpha: signal.values[seen],
            alpha_sd: signal.alpha_sd,
        };
        let out = step(
            &state,
            sig,
            &bars[t],
            &bars[t + 1],
            pending.as_ref(),
            strategy,
            config,
            &mut ext,
        )?;
        rows.push(out.row);
        state = out.state;
        pending = out.pending;
    }

    let trades: Vec<Trade> = rows
        .iter()
        .filter_map(|r| r.fill)
        .map(|f| Trade {
            t: (f.timestamp * 60) as f64,
            notional: f.price * f.qty_btc,
        })
        .collect();
    let log = TradeLog::new(trades).expect("fills are chronological");
    let report = charge(&log, impact, jobs);
    let mut costs = report.per_trade_costs.iter();
    for row in rows.iter_mut().filter(|r| r.fill.is_some()) {
        row.impact_cost = *costs.next().expect("one cost per fill");
        row.pnl_adj = row.pnl_net - row.impact_cost;
    }

    Ok(Ledger {
        label: series.label(),
        initial_position_btc: config.initial_position_btc,
        final_position_btc: state.position_btc,
        rows,
        impact: report,
    })
}
