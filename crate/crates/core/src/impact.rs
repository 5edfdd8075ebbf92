//! Propagator market-impact model with square-root size dependence and
//! power-law transient decay, charged post-hoc against a trade log.
//!
//! For trades `(t_i, Q_i)` with signed USD notional `Q_i`:
//!
//! ```text
//! s_i  = sign(Q_i) * (|Q_i| / V)^delta
//! G(t) = (tau0 / (t + tau0))^beta
//! D_i  = alpha_perm * sum_{j: t_j <= t_i} s_j + alpha_trans * sum_{j: t_j <= t_i} s_j G(t_i - t_j)
//! c_i  = D_i * Q_i
//! ```
//!
//! Trade `i` always sees its own impact (`G(0) = 1`). Trades sharing a
//! timestamp are ordered by log position: trade `i` sees every earlier entry
//! in the log plus itself.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::par::{self, Jobs};

#[derive(Debug, Error, PartialEq)]
pub enum ImpactError {
    #[error("impact parameter {0} must be finite and strictly positive")]
    NonPositive(&'static str),
    #[error("impact exponent {0} must lie in (0, 2)")]
    ExponentRange(&'static str),
    #[error("trade log timestamps decrease at index {0}")]
    Unordered(usize),
}

/// Model parameters. Field names match the `impact` config section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ImpactParams {
    pub daily_volume_usd: f64,
    pub alpha_perm: f64,
    pub alpha_trans: f64,
    pub tau0_seconds: f64,
    pub beta: f64,
    pub delta: f64,
}

impl Default for ImpactParams {
    fn default() -> Self {
        ImpactParams {
            daily_volume_usd: 2e9,
            alpha_perm: 0.005,
            alpha_trans: 0.010,
            tau0_seconds: 300.0,
            beta: 0.5,
            delta: 0.5,
        }
    }
}

impl ImpactParams {
    pub fn validate(&self) -> Result<(), ImpactError> {
        let positive = [
            ("daily_volume_usd", self.daily_volume_usd),
            ("alpha_perm", self.alpha_perm),
            ("alpha_trans", self.alpha_trans),
            ("tau0_seconds", self.tau0_seconds),
            ("beta", self.beta),
            ("delta", self.delta),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(ImpactError::NonPositive(name));
            }
        }
        if self.beta >= 2.0 {
            return Err(ImpactError::ExponentRange("beta"));
        }
        if self.delta >= 2.0 {
            return Err(ImpactError::ExponentRange("delta"));
        }
        Ok(())
    }
}

/// One executed trade: epoch seconds and signed USD notional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trade {
    pub t: f64,
    pub notional: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TradeLog {
    trades: Vec<Trade>,
}

impl TradeLog {
    pub fn new(trades: Vec<Trade>) -> Result<Self, ImpactError> {
        if let Some(i) = trades.windows(2).position(|w| w[1].t < w[0].t) {
            return Err(ImpactError::Unordered(i + 1));
        }
        Ok(TradeLog { trades })
    }

    pub fn trades(&self) -> &[Trade] {
        &self.trades
    }

    pub fn len(&self) -> usize {
        self.trades.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trades.is_empty()
    }

    pub fn scaled(&self, k: f64) -> TradeLog {
        TradeLog {
            trades: self
                .trades
                .iter()
                .map(|tr| Trade {
                    t: tr.t,
                    notional: tr.notional * k,
                })
                .collect(),
        }
    }

    pub fn shifted(&self, dt: f64) -> TradeLog {
        TradeLog {
            trades: self
                .trades
                .iter()
                .map(|tr| Trade {
                    t: tr.t + dt,
                    notional: tr.notional,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ImpactReport {
    pub per_trade_costs: Vec<f64>,
    /// Interval start (epoch seconds, floored to the minute) to summed cost.
    pub per_interval: BTreeMap<i64, f64>,
    pub total_cost: f64,
    pub traded_notional: f64,
    /// Zero when nothing traded.
    pub cost_bps: f64,
}

pub fn decay_kernel(tau: f64, params: &ImpactParams) -> f64 {
    let ratio = params.tau0_seconds / (tau + params.tau0_seconds);
    if params.beta == 0.5 {
        ratio.sqrt()
    } else {
        ratio.powf(params.beta)
    }
}

pub fn size_factor(notional: f64, params: &ImpactParams) -> f64 {
    if notional == 0.0 {
        return 0.0;
    }
    let x = notional.abs() / params.daily_volume_usd;
    let mag = if params.delta == 0.5 {
        x.sqrt()
    } else {
        x.powf(params.delta)
    };
    notional.signum() * mag
}

/// Charges every trade in `log`; the transient sum is evaluated in parallel
/// across trades according to `jobs`.
pub fn charge(log: &TradeLog, params: &ImpactParams, jobs: Jobs) -> ImpactReport {
    let trades = log.trades();
    let n = trades.len();
    let sizes: Vec<f64> = trades
        .iter()
        .map(|tr| size_factor(tr.notional, params))
        .collect();

    let mut permanent = Vec::with_capacity(n);
    let mut running = 0.0;
    for s in &sizes {
        running += s;
        permanent.push(running);
    }

    let transient = par::map_range(n, jobs, |i| {
        let ti = trades[i].t;
        trades[..=i]
            .iter()
            .zip(&sizes[..=i])
            .map(|(tj, sj)| sj * decay_kernel(ti - tj.t, params))
            .sum::<f64>()
    });

    let per_trade_costs: Vec<f64> = (0..n)
        .map(|i| {
            let displacement = params.alpha_perm * permanent[i] + params.alpha_trans * transient[i];
            displacement * trades[i].notional
        })
        .collect();
    summarize(trades, per_trade_costs)
}

/// Direct double sum over all trade pairs, kept as a reference for
/// [`charge`].
pub fn charge_reference(log: &TradeLog, params: &ImpactParams) -> ImpactReport {
    let trades = log.trades();
    let sign_size = |q: f64| {
        if q == 0.0 {
            0.0
        } else {
            q.signum() * (q.abs() / params.daily_volume_usd).powf(params.delta)
        }
    };
    let costs = (0..trades.len())
        .map(|i| {
            let mut d = 0.0;
            for j in 0..=i {
                let s = sign_size(trades[j].notional);
                let g = (params.tau0_seconds / (trades[i].t - trades[j].t + params.tau0_seconds))
                    .powf(params.beta);
                d += params.alpha_perm * s + params.alpha_trans * s * g;
            }
            d * trades[i].notional
        })
        .collect();
    summarize(trades, costs)
}

fn summarize(trades: &[Trade], per_trade_costs: Vec<f64>) -> ImpactReport {
    let mut per_interval = BTreeMap::new();
    for (tr, c) in trades.iter().zip(&per_trade_costs) {
        let bucket = (tr.t / 60.0).floor() as i64 * 60;
        *per_interval.entry(bucket).or_insert(0.0) += c;
    }
    let total_cost: f64 = per_trade_costs.iter().sum();
    let traded_notional: f64 = trades.iter().map(|t| t.notional.abs()).sum();
    let cost_bps = if traded_notional > 0.0 {
        total_cost / traded_notional * 10_000.0
    } else {
        0.0
    };
    ImpactReport {
        per_trade_costs,
        per_interval,
        total_cost,
        traded_notional,
        cost_bps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn log(pairs: &[(f64, f64)]) -> TradeLog {
        TradeLog::new(
            pairs
                .iter()
                .map(|&(t, notional)| Trade { t, notional })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn kernel_values() {
        let p = ImpactParams::default();
        assert_eq!(decay_kernel(0.0, &p), 1.0);
        assert_relative_eq!(decay_kernel(300.0, &p), 0.5f64.sqrt(), max_relative = 1e-15);
        assert!(decay_kernel(1e9, &p) < 1e-3);
        let generic = ImpactParams { beta: 0.7, ..p };
        assert_relative_eq!(
            decay_kernel(300.0, &generic),
            0.5f64.powf(0.7),
            max_relative = 1e-15
        );
    }

    #[test]
    fn size_factor_values() {
        let p = ImpactParams::default();
        assert_eq!(size_factor(2e9, &p), 1.0);
        assert_eq!(size_factor(0.0, &p), 0.0);
        assert_eq!(size_factor(-5e8, &p), -0.5);
    }

    #[test]
    fn single_trade_table_values() {
        let r = charge(
            &log(&[(0.0, 2e9)]),
            &ImpactParams::default(),
            Jobs::SEQUENTIAL,
        );
        assert_relative_eq!(r.total_cost, 3.0e7, max_relative = 1e-12);
        assert_relative_eq!(r.cost_bps, 150.0, max_relative = 1e-12);
    }

    #[test]
    fn empty_log() {
        let r = charge(
            &TradeLog::default(),
            &ImpactParams::default(),
            Jobs::SEQUENTIAL,
        );
        assert_eq!(r.total_cost, 0.0);
        assert_eq!(r.cost_bps, 0.0);
        assert!(r.per_trade_costs.is_empty());
    }

    #[test]
    fn simultaneous_opposite_trades() {
        let p = ImpactParams::default();
        let q = 1e6;
        let r = charge(&log(&[(60.0, q), (60.0, -q)]), &p, Jobs::SEQUENTIAL);
        let s = (q / p.daily_volume_usd).sqrt();
        // First trade sees only itself; second sees +s then -s, which cancel.
        assert_relative_eq!(r.per_trade_costs[0], 0.015 * s * q, max_relative = 1e-14);
        assert_eq!(r.per_trade_costs[1], 0.0);
        let brute = charge_reference(&log(&[(60.0, q), (60.0, -q)]), &p);
        assert_relative_eq!(r.total_cost, brute.total_cost, max_relative = 1e-12);
    }

    #[test]
    fn unordered_log_rejected() {
        assert_eq!(
            TradeLog::new(vec![
                Trade {
                    t: 5.0,
                    notional: 1.0
                },
                Trade {
                    t: 4.0,
                    notional: 1.0
                }
            ]),
            Err(ImpactError::Unordered(1))
        );
    }

    #[test]
    fn params_validated() {
        assert!(ImpactParams::default().validate().is_ok());
        assert!(ImpactParams {
            beta: 2.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(ImpactParams {
            alpha_perm: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn intervals_bucket_by_minute() {
        let r = charge(
            &log(&[(60.0, 1e5), (90.0, 1e5), (120.0, -1e5)]),
            &ImpactParams::default(),
            Jobs::SEQUENTIAL,
        );
        assert_eq!(r.per_interval.len(), 2);
        assert_relative_eq!(
            r.per_interval[&60],
            r.per_trade_costs[0] + r.per_trade_costs[1]
        );
    }

    fn arb_log() -> impl Strategy<Value = Vec<(f64, f64)>> {
        proptest::collection::vec((0.0f64..3600.0, -5e6f64..5e6), 1..60).prop_map(|mut v| {
            v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            v
        })
    }

    proptest! {
        #[test]
        fn matches_brute_force(pairs in arb_log()) {
            let p = ImpactParams::default();
            let l = log(&pairs);
            let fast = charge(&l, &p, Jobs::SEQUENTIAL);
            let slow = charge_reference(&l, &p);
            for (a, b) in fast.per_trade_costs.iter().zip(&slow.per_trade_costs) {
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300) || (a - b).abs() < 1e-9);
            }
        }

        #[test]
        fn time_translation_invariant(pairs in arb_log(), dt in 0.0f64..1e6) {
            let p = ImpactParams::default();
            let a = charge(&log(&pairs), &p, Jobs::SEQUENTIAL).total_cost;
            let b = charge(&log(&pairs).shifted(dt), &p, Jobs::SEQUENTIAL).total_cost;
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }

        #[test]
        fn buying_into_buy_pressure_costs(sizes in proptest::collection::vec(1e3f64..1e7, 1..30)) {
            let pairs: Vec<(f64, f64)> = sizes.iter().enumerate().map(|(i, &q)| (i as f64 * 60.0, q)).collect();
            let r = charge(&log(&pairs), &ImpactParams::default(), Jobs::SEQUENTIAL);
            prop_assert!(r.per_trade_costs.iter().all(|&c| c > 0.0));
        }
    }
}
