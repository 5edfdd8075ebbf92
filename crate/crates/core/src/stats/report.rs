use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    phacking_ceiling, z_excess, IsOosCurve, NullModel, PerfMetrics, SizingDecomposition, StatsError,
};

pub const SHARPE_CONVENTION: &str =
    "daily dollar pnl_adj; sharpe = mean/std(ddof=1)*sqrt(365); sortino downside = sqrt(mean(min(d,0)^2)); calmar = 365*mean/|maxDD|";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullBlock {
    pub pnl0: f64,
    pub s0: f64,
    pub sigma0: f64,
    pub window_days: f64,
    pub k: usize,
    pub ceiling: f64,
    pub observed: Option<f64>,
    pub z: Option<f64>,
}

impl NullBlock {
    pub fn new(null: &NullModel, k: usize, observed: Option<f64>) -> Result<Self, StatsError> {
        Ok(NullBlock {
            pnl0: null.pnl0,
            s0: null.s0,
            sigma0: null.sigma0,
            window_days: null.window_days,
            k,
            ceiling: phacking_ceiling(null, k)?,
            observed,
            z: observed.map(|o| z_excess(o, null)),
        })
    }
}

/// Everything `analyze` reports, keyed by split name where relevant.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub sharpe_convention: String,
    pub metrics: BTreeMap<String, PerfMetrics>,
    pub sizing: BTreeMap<String, SizingDecomposition>,
    pub null_model: BTreeMap<String, NullBlock>,
    pub is_oos: Option<IsOosCurve>,
}

impl AnalysisReport {
    pub fn new() -> Self {
        AnalysisReport {
            sharpe_convention: SHARPE_CONVENTION.to_string(),
            ..Default::default()
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}
