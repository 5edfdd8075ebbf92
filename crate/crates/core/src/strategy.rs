//! The baseline passive executor.
//!
//! Alpha is turned into a cost-adjusted USD target position (`set_target`)
//! and then into a single passive limit order (`set_limit_order`). All tunable
//! constants live in [`StrategyParams`], which converts to and from a
//! [`Genome`] with UPPER_CASE keys.

use serde::{Deserialize, Serialize};

use crate::calibration::{ParamScale, ParamSpace, ParamSpec};
use crate::genome::Genome;
use crate::simulator::{
    OrderIntent, Side, StateExt, Strategy, StrategyError, StrategyOutput, StrategyState,
};

/// Fee floor inside the expected-fee threshold (0.015%).
pub const FEE_RATE_LITERAL: f64 = 0.015 / 100.0;
/// Minimum expected fee (0.005%).
pub const MIN_EXPECTED_FEE: f64 = 0.005 / 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrategyParams {
    pub sizing_factor: f64,
    pub q_max: f64,
    pub max_trade_frac: f64,
    pub min_trade_size_usd: f64,
    pub alpha_adjustment_knob: f64,
    pub risk_reduction_factor: f64,
    pub zp: f64,
    pub zp_riskoff: f64,
    pub fast_flat_minutes: f64,
    pub std: f64,
    pub context_correction_factor: f64,
}

impl Default for StrategyParams {
    fn default() -> Self {
        StrategyParams {
            sizing_factor: 10_000.0,
            q_max: 200_000.0,
            max_trade_frac: 0.2,
            min_trade_size_usd: 0.0,
            alpha_adjustment_knob: 0.5,
            risk_reduction_factor: 0.6,
            zp: 1e-4,
            zp_riskoff: 3e-5,
            fast_flat_minutes: 10.0,
            std: 1.0,
            context_correction_factor: 0.0,
        }
    }
}

pub const GENOME_KEYS: [&str; 11] = [
    "SIZING_FACTOR",
    "Q_MAX",
    "MAX_TRADE_FRAC",
    "MIN_TRADE_SIZE_USD",
    "ALPHA_ADJUSTMENT_KNOB",
    "RISK_REDUCTION_FACTOR",
    "ZP",
    "ZP_RISKOFF",
    "FAST_FLAT_MINUTES",
    "STD",
    "CONTEXT_CORRECTION_FACTOR",
];

impl StrategyParams {
    fn values(&self) -> [f64; 11] {
        [
            self.sizing_factor,
            self.q_max,
            self.max_trade_frac,
            self.min_trade_size_usd,
            self.alpha_adjustment_knob,
            self.risk_reduction_factor,
            self.zp,
            self.zp_riskoff,
            self.fast_flat_minutes,
            self.std,
            self.context_correction_factor,
        ]
    }

    fn slots(&mut self) -> [&mut f64; 11] {
        [
            &mut self.sizing_factor,
            &mut self.q_max,
            &mut self.max_trade_frac,
            &mut self.min_trade_size_usd,
            &mut self.alpha_adjustment_knob,
            &mut self.risk_reduction_factor,
            &mut self.zp,
            &mut self.zp_riskoff,
            &mut self.fast_flat_minutes,
            &mut self.std,
            &mut self.context_correction_factor,
        ]
    }

    pub fn to_genome(&self) -> Genome {
        GENOME_KEYS.iter().copied().zip(self.values()).collect()
    }

    /// Missing keys keep their defaults; unknown keys are ignored.
    pub fn from_genome(genome: &Genome) -> Self {
        let mut p = StrategyParams::default();
        for (key, slot) in GENOME_KEYS.iter().zip(p.slots()) {
            if let Some(v) = genome.get(key) {
                *slot = v;
            }
        }
        p
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.values().iter().any(|v| !v.is_finite()) {
            return Err("strategy parameters must be finite".into());
        }
        if !(self.q_max > 0.0) {
            return Err("Q_MAX must be positive".into());
        }
        if !(self.fast_flat_minutes > 0.0) {
            return Err("FAST_FLAT_MINUTES must be positive".into());
        }
        if !(self.sizing_factor > 0.0) {
            return Err("SIZING_FACTOR must be positive".into());
        }
        Ok(())
    }
}

/// The eight calibrated parameters with their search bounds and scales.
/// `Q_MAX`, `STD` and `CONTEXT_CORRECTION_FACTOR` stay fixed.
pub fn default_param_space() -> ParamSpace {
    let p = |name: &str, lower, upper, scale| ParamSpec {
        name: name.to_string(),
        lower,
        upper,
        scale,
    };
    ParamSpace::new(vec![
        p("SIZING_FACTOR", 500.0, 50_000.0, ParamScale::Log),
        p("MAX_TRADE_FRAC", 0.01, 0.5, ParamScale::Linear),
        p("MIN_TRADE_SIZE_USD", 0.0, 5_000.0, ParamScale::Linear),
        p("ALPHA_ADJUSTMENT_KNOB", 0.0, 1.0, ParamScale::Linear),
        p("RISK_REDUCTION_FACTOR", 0.0, 1.0, ParamScale::Linear),
        p("ZP", 1e-6, 1e-2, ParamScale::Log),
        p("ZP_RISKOFF", 1e-6, 1e-2, ParamScale::Log),
        p("FAST_FLAT_MINUTES", 2.0, 60.0, ParamScale::Linear),
    ])
    .expect("static bounds are valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetDecision {
    pub side: Option<Side>,
    pub target_trade_qty: f64,
    pub risk_reduction_mode: bool,
    pub limit_order_depth: f64,
    pub expected_fee: f64,
    /// Target before the inventory/lag corrections and clipping.
    pub raw_target_usd: f64,
    pub target_pos_usd: f64,
    pub target_pos_btc: f64,
    /// Set when alpha was not finite; no order is produced.
    pub non_finite_alpha: bool,
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

pub fn set_target(state: &StrategyState, params: &StrategyParams) -> TargetDecision {
    let StrategyState {
        alpha,
        alpha_sd,
        mid,
        mid_book,
        position_btc: q_x,
        data_lag_minutes,
        ..
    } = *state;

    let limit_order_depth = params.std * params.zp;
    let expected_fee = (FEE_RATE_LITERAL - limit_order_depth).max(MIN_EXPECTED_FEE);

    if !alpha.is_finite() || !alpha_sd.is_finite() {
        return TargetDecision {
            side: None,
            target_trade_qty: 0.0,
            risk_reduction_mode: false,
            limit_order_depth,
            expected_fee,
            raw_target_usd: f64::NAN,
            target_pos_usd: f64::NAN,
            target_pos_btc: q_x,
            non_finite_alpha: true,
        };
    }

    let realized_alpha = (mid_book / mid).ln();
    let alpha_corrected = alpha - params.context_correction_factor * realized_alpha;
    let q_usd = {
        let v = q_x * mid_book;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };

    let k = params.sizing_factor / alpha_sd;
    let small_alpha = (alpha_corrected - q_usd / k).abs() < expected_fee;
    let wrong_direction = sign(q_x * alpha_corrected) < 0.0;
    let risk_reduction_mode = small_alpha && wrong_direction;

    let raw_target_usd = if risk_reduction_mode {
        q_usd * params.risk_reduction_factor
    } else if realized_alpha.abs() * params.context_correction_factor > alpha.abs()
        && sign(realized_alpha * alpha) > 0.0
    {
        q_usd
    } else {
        let long_target_usd = params.sizing_factor * (alpha_corrected - expected_fee) / alpha_sd;
        let short_target_usd = params.sizing_factor * (alpha_corrected + expected_fee) / alpha_sd;
        if long_target_usd > q_usd {
            long_target_usd
        } else if short_target_usd < q_usd {
            short_target_usd
        } else {
            q_usd
        }
    };

    let lag_adjustment =
        1.0 - data_lag_minutes.min(params.fast_flat_minutes) / params.fast_flat_minutes;
    let correction_factor = if risk_reduction_mode {
        lag_adjustment
    } else {
        let risk_adjustment =
            1.0 - (q_usd.abs() / params.q_max).tanh() * params.alpha_adjustment_knob;
        risk_adjustment * lag_adjustment
    };

    let target_pos_usd = (raw_target_usd * correction_factor).clamp(-params.q_max, params.q_max);
    let target_pos_btc = target_pos_usd / mid_book;

    let raw_trade_qty = target_pos_btc - q_x;
    let max_trade_btc = params.max_trade_frac * params.q_max / mid_book;
    let target_trade_qty = raw_trade_qty.clamp(-max_trade_btc, max_trade_btc);

    let delta_usd = (target_pos_btc - q_x).abs() * mid_book;
    let side = if target_pos_btc > q_x && delta_usd > params.min_trade_size_usd {
        Some(Side::Buy)
    } else if target_pos_btc < q_x && delta_usd > params.min_trade_size_usd {
        Some(Side::Sell)
    } else {
        None
    };

    TargetDecision {
        side,
        target_trade_qty,
        risk_reduction_mode,
        limit_order_depth,
        expected_fee,
        raw_target_usd,
        target_pos_usd,
        target_pos_btc,
        non_finite_alpha: false,
    }
}

pub fn set_limit_order(
    state: &StrategyState,
    decision: &TargetDecision,
    params: &StrategyParams,
) -> Option<OrderIntent> {
    let side = decision.side?;
    let depth = if decision.risk_reduction_mode {
        params.zp_riskoff * params.std
    } else {
        decision.limit_order_depth
    };
    let limit_price = state.mid_book * (-sign(decision.target_trade_qty) * depth).exp();
    Some(OrderIntent {
        side,
        limit_price,
        qty_btc: decision.target_trade_qty,
    })
}

/// `set_limit_order(set_target(state))`, returning the decision alongside.
pub fn set_passive_order_data(
    state: &StrategyState,
    params: &StrategyParams,
) -> (TargetDecision, Option<OrderIntent>) {
    let decision = set_target(state, params);
    let order = set_limit_order(state, &decision, params);
    (decision, order)
}

/// Stateless baseline strategy.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BaselineStrategy {
    pub params: StrategyParams,
}

impl BaselineStrategy {
    pub fn new(params: StrategyParams) -> Self {
        BaselineStrategy { params }
    }

    pub fn from_genome(genome: &Genome) -> Result<Self, String> {
        let params = StrategyParams::from_genome(genome);
        params.validate()?;
        Ok(BaselineStrategy { params })
    }
}

impl Strategy for BaselineStrategy {
    fn decide(
        &self,
        state: &StrategyState,
        _ext: &mut StateExt,
    ) -> Result<StrategyOutput, StrategyError> {
        let (decision, order) = set_passive_order_data(state, &self.params);
        Ok(StrategyOutput {
            order,
            target_position_btc: Some(if decision.target_pos_btc.is_finite() {
                decision.target_pos_btc
            } else {
                state.position_btc
            }),
        })
    }
}
