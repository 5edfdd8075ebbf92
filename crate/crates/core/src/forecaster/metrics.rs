use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ridge::sample_std;
use super::ForecastError;

pub const R2_WEIGHT: f64 = 0.4;
pub const IC_WEIGHT: f64 = 0.3;
pub const ICIR_WEIGHT: f64 = 0.3;
pub const ICIR_CLAMP: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastMetrics {
    pub r2: f64,
    pub ic_mean: f64,
    pub icir: f64,
    pub combined: f64,
    pub n_days: usize,
    /// False when fewer than two days were available and `icir` was set to 0.
    pub icir_defined: bool,
}

/// `0.4 * clamp(r2, -1, 1) + 0.3 * clamp(ic, -1, 1) + 0.3 * clamp(icir, -5, 5) / 5`.
pub fn composite_score(r2: f64, ic: f64, icir: f64) -> f64 {
    let clamp = |v: f64, lim: f64| if v.is_nan() { 0.0 } else { v.clamp(-lim, lim) };
    R2_WEIGHT * clamp(r2, 1.0)
        + IC_WEIGHT * clamp(ic, 1.0)
        + ICIR_WEIGHT * clamp(icir, ICIR_CLAMP) / ICIR_CLAMP
}

/// No-intercept R²: `1 - sum (y - yhat)^2 / sum y^2`; zero when `y` is all zero.
pub fn r2_no_intercept(pred: &[f64], realized: &[f64]) -> f64 {
    let ss_tot: f64 = realized.iter().map(|y| y * y).sum();
    if ss_tot == 0.0 {
        return 0.0;
    }
    let ss_res: f64 = pred
        .iter()
        .zip(realized)
        .map(|(p, y)| (y - p).powi(2))
        .sum();
    1.0 - ss_res / ss_tot
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation; zero when either side has no variance.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n < 2 {
        return 0.0;
    }
    let ma = a[..n].iter().sum::<f64>() / n as f64;
    let mb = b[..n].iter().sum::<f64>() / n as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let da = a[i] - ma;
        let db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    let r = sab / (saa * sbb).sqrt();
    if r.is_finite() {
        r.clamp(-1.0, 1.0)
    } else {
        0.0
    }
}

/// Spearman rank correlation (average ranks for ties); zero if either input is constant.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    pearson(&average_ranks(a), &average_ranks(b))
}

/// Scores an alpha column against realized forward returns, grouping
/// information coefficients by `day_index`.
pub fn score_forecast(
    pred: &[f64],
    realized: &[f64],
    day_index: &[i64],
) -> Result<ForecastMetrics, ForecastError> {
    if pred.len() != realized.len() || pred.len() != day_index.len() {
        return Err(ForecastError::Shape(format!(
            "pred {}, realized {}, days {}",
            pred.len(),
            realized.len(),
            day_index.len()
        )));
    }
    let r2 = r2_no_intercept(pred, realized);

    let mut by_day: BTreeMap<i64, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for i in 0..pred.len() {
        let e = by_day.entry(day_index[i]).or_default();
        e.0.push(pred[i]);
        e.1.push(realized[i]);
    }
    let daily: Vec<f64> = by_day.values().map(|(p, y)| spearman(p, y)).collect();
    let n_days = daily.len();
    let ic_mean = if n_days == 0 {
        0.0
    } else {
        daily.iter().sum::<f64>() / n_days as f64
    };

    let (icir, icir_defined) = if n_days < 2 {
        (0.0, false)
    } else {
        let sd = sample_std(&daily);
        let v = if sd > 0.0 {
            ic_mean / sd
        } else if ic_mean > 0.0 {
            f64::INFINITY
        } else if ic_mean < 0.0 {
            f64::NEG_INFINITY
        } else {
            0.0
        };
        (v, true)
    };

    Ok(ForecastMetrics {
        r2,
        ic_mean,
        icir,
        combined: composite_score(r2, ic_mean, icir),
        n_days,
        icir_defined,
    })
}
