use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{Fill, OrderIntent};
use crate::impact::{ImpactReport, Trade, TradeLog};
use crate::market_data::SplitLabel;

/// One simulated interval. `pnl_adj = pnl_net - impact_cost`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub timestamp: i64,
    pub mid: f64,
    pub position_after: f64,
    pub mid_move: f64,
    pub pnl_pos: f64,
    pub pnl_target: f64,
    pub pnl_net: f64,
    pub pnl_adj: f64,
    pub impact_cost: f64,
    pub fill: Option<Fill>,
    pub target_position_btc: f64,
    /// Order left resting at the end of the interval.
    pub order: Option<OrderIntent>,
}

/// Column sums. `pnl_adj` is `pnl_net - impact_cost` of the sums, so the
/// identity holds exactly at the aggregate level too.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LedgerTotals {
    pub pnl_pos: f64,
    pub pnl_target: f64,
    pub pnl_net: f64,
    pub pnl_adj: f64,
    pub impact_cost: f64,
    pub traded_btc: f64,
    pub traded_notional: f64,
    pub trades: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ledger {
    pub label: SplitLabel,
    pub initial_position_btc: f64,
    pub final_position_btc: f64,
    pub rows: Vec<LedgerRow>,
    pub impact: ImpactReport,
}

#[derive(Serialize)]
struct CsvRow {
    timestamp: i64,
    mid: f64,
    position_after: f64,
    mid_move: f64,
    pnl_pos: f64,
    pnl_target: f64,
    pnl_net: f64,
    pnl_adj: f64,
    impact_cost: f64,
    fill_qty: f64,
    fill_price: f64,
    target_position_btc: f64,
}

impl Ledger {
    pub fn fills(&self) -> impl Iterator<Item = &Fill> {
        self.rows.iter().filter_map(|r| r.fill.as_ref())
    }

    pub fn trade_count(&self) -> usize {
        self.fills().count()
    }

    pub fn trade_log(&self) -> TradeLog {
        let trades = self
            .fills()
            .map(|f| Trade {
                t: (f.timestamp * 60) as f64,
                notional: f.price * f.qty_btc,
            })
            .collect();
        TradeLog::new(trades).expect("fills are chronological")
    }

    pub fn totals(&self) -> LedgerTotals {
        let mut t = LedgerTotals::default();
        for r in &self.rows {
            t.pnl_pos += r.pnl_pos;
            t.pnl_target += r.pnl_target;
            t.pnl_net += r.pnl_net;
            t.impact_cost += r.impact_cost;
            if let Some(f) = r.fill {
                t.traded_btc += f.qty_btc.abs();
                t.traded_notional += (f.qty_btc * f.price).abs();
                t.trades += 1;
            }
        }
        t.pnl_adj = t.pnl_net - t.impact_cost;
        t
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        for r in &self.rows {
            w.serialize(CsvRow {
                timestamp: r.timestamp,
                mid: r.mid,
                position_after: r.position_after,
                mid_move: r.mid_move,
                pnl_pos: r.pnl_pos,
                pnl_target: r.pnl_target,
                pnl_net: r.pnl_net,
                pnl_adj: r.pnl_adj,
                impact_cost: r.impact_cost,
                fill_qty: r.fill.map_or(0.0, |f| f.qty_btc),
                fill_price: r.fill.map_or(f64::NAN, |f| f.price),
                target_position_btc: r.target_position_btc,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_jsonl<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        for r in &self.rows {
            serde_json::to_writer(&mut writer, r)?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }
}
