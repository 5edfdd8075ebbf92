use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::market_data::MINUTES_PER_DAY;
use crate::simulator::Ledger;

/// Ledger rows aggregated by calendar day (UTC).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DailyPnlSeries {
    /// Days since the Unix epoch.
    pub days: Vec<i64>,
    pub pnl_adj: Vec<f64>,
    pub pnl_net: Vec<f64>,
    /// Position PnL before spread capture, fees and impact.
    pub frictionless: Vec<f64>,
    pub impact: Vec<f64>,
    pub volume_usd: Vec<f64>,
    /// Fill rows and how many of them had positive `pnl_adj`.
    pub fills: usize,
    pub winning_fills: usize,
}

impl DailyPnlSeries {
    pub fn from_ledger(ledger: &Ledger) -> Self {
        let mut by_day: BTreeMap<i64, [f64; 5]> = BTreeMap::new();
        let mut out = DailyPnlSeries::default();
        for r in &ledger.rows {
            let e = by_day
                .entry(r.timestamp.div_euclid(MINUTES_PER_DAY))
                .or_default();
            e[0] += r.pnl_adj;
            e[1] += r.pnl_net;
            e[2] += r.pnl_pos;
            e[3] += r.impact_cost;
            if let Some(f) = r.fill {
                e[4] += (f.qty_btc * f.price).abs();
                out.fills += 1;
                out.winning_fills += usize::from(r.pnl_adj > 0.0);
            }
        }
        for (day, [adj, net, pos, imp, vol]) in by_day {
            out.days.push(day);
            out.pnl_adj.push(adj);
            out.pnl_net.push(net);
            out.frictionless.push(pos);
            out.impact.push(imp);
            out.volume_usd.push(vol);
        }
        out
    }

    /// A series carrying only `pnl_adj` (other streams equal to it, zero impact
    /// and volume). Handy for metric checks.
    pub fn from_pnl(pnl_adj: &[f64]) -> Self {
        let n = pnl_adj.len();
        DailyPnlSeries {
            days: (0..n as i64).collect(),
            pnl_adj: pnl_adj.to_vec(),
            pnl_net: pnl_adj.to_vec(),
            frictionless: pnl_adj.to_vec(),
            impact: vec![0.0; n],
            volume_usd: vec![0.0; n],
            fills: 0,
            winning_fills: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.days.len()
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }

    /// Every stream multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let s = |v: &[f64]| v.iter().map(|x| x * k).collect();
        DailyPnlSeries {
            days: self.days.clone(),
            pnl_adj: s(&self.pnl_adj),
            pnl_net: s(&self.pnl_net),
            frictionless: s(&self.frictionless),
            impact: s(&self.impact),
            volume_usd: s(&self.volume_usd),
            ..*self
        }
    }
}
