use serde::{Deserialize, Serialize};

use super::StatsError;

/// PnL of the baseline if every trade were scaled by `k`: frictionless PnL
/// grows linearly, impact as k^1.5.
pub fn sizing_counterfactual(f_b: f64, i_b: f64, k: f64) -> f64 {
    k * f_b - k.powf(1.5) * i_b
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizingDecomposition {
    /// Baseline PnL before impact.
    pub f_b: f64,
    /// Baseline impact cost.
    pub i_b: f64,
    /// Volume ratio evolved / baseline.
    pub k: f64,
    pub counterfactual: f64,
    pub evolved: f64,
    /// evolved / counterfactual; 1 when the gain is pure sizing.
    pub ratio: f64,
}

impl SizingDecomposition {
    pub fn new(
        f_b: f64,
        i_b: f64,
        baseline_volume: f64,
        evolved_pnl: f64,
        evolved_volume: f64,
    ) -> Result<Self, StatsError> {
        if !(baseline_volume > 0.0) {
            return Err(StatsError::Invalid(
                "baseline volume must be positive".into(),
            ));
        }
        if !(i_b >= 0.0) {
            return Err(StatsError::Invalid(
                "impact cost must be non-negative".into(),
            ));
        }
        let k = evolved_volume / baseline_volume;
        let counterfactual = sizing_counterfactual(f_b, i_b, k);
        Ok(SizingDecomposition {
            f_b,
            i_b,
            k,
            counterfactual,
            evolved: evolved_pnl,
            ratio: evolved_pnl / counterfactual,
        })
    }
}

/// Gaussian null for best-of-K selection, calibrated from the baseline:
/// σ0 = PnL0 / S0 over a window of `window_days`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullModel {
    pub pnl0: f64,
    pub s0: f64,
    pub sigma0: f64,
    pub window_days: f64,
}

impl NullModel {
    pub fn new(pnl0: f64, s0: f64, window_days: f64) -> Result<Self, StatsError> {
        if !(s0 > 0.0 && s0.is_finite()) {
            return Err(StatsError::NonPositiveSharpe(s0));
        }
        if !(window_days > 0.0) {
            return Err(StatsError::Invalid("window must be positive".into()));
        }
        Ok(NullModel {
            pnl0,
            s0,
            sigma0: pnl0 / s0,
            window_days,
        })
    }

    /// σ for a window of `days`, scaled by √(days / window_days).
    pub fn sigma_for(&self, days: f64) -> f64 {
        self.sigma0 * (days / self.window_days).sqrt()
    }

    /// The null transported to another split: new baseline PnL, σ rescaled to
    /// the new window length.
    pub fn rescaled(&self, pnl0: f64, days: f64) -> NullModel {
        let sigma0 = self.sigma_for(days);
        NullModel {
            pnl0,
            s0: pnl0 / sigma0,
            sigma0,
            window_days: days,
        }
    }
}

/// Expected best of K Gaussian trials: PnL0 + σ0·√(2 ln K).
pub fn phacking_ceiling(null: &NullModel, k: usize) -> Result<f64, StatsError> {
    if k == 0 {
        return Err(StatsError::Invalid("K must be >= 1".into()));
    }
    Ok(null.pnl0 + null.sigma0 * (2.0 * (k as f64).ln()).sqrt())
}

pub fn z_excess(observed: f64, null: &NullModel) -> f64 {
    (observed - null.pnl0) / null.sigma0
}

/// In-sample and out-of-sample fitness of one candidate, in evaluation order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub is_fitness: Option<f64>,
    pub oos_fitness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IsOosCurve {
    /// Best in-sample fitness among the first n+1 candidates.
    pub is_best: Vec<Option<f64>>,
    /// Out-of-sample fitness of the candidate holding that record.
    pub oos: Vec<Option<f64>>,
    pub champion: Vec<Option<usize>>,
    /// OOS / IS of the final champion.
    pub degradation_ratio: Option<f64>,
}

pub fn is_oos_curve(points: &[CurvePoint]) -> IsOosCurve {
    let mut curve = IsOosCurve::default();
    let mut champ: Option<(usize, f64)> = None;
    for (i, p) in points.iter().enumerate() {
        if let Some(f) = p.is_fitness.filter(|f| f.is_finite()) {
            if champ.is_none_or(|(_, best)| f > best) {
                champ = Some((i, f));
            }
        }
        curve.is_best.push(champ.map(|(_, f)| f));
        curve
            .oos
            .push(champ.and_then(|(j, _)| points[j].oos_fitness));
        curve.champion.push(champ.map(|(j, _)| j));
    }
    curve.degradation_ratio = champ.and_then(|(j, is)| points[j].oos_fitness.map(|o| o / is));
    curve
}
