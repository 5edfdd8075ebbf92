use serde::{Deserialize, Serialize};

use super::{FeatureMatrix, ForecastError};
use crate::market_data::BarSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReturnKind {
    #[default]
    Pct,
    Log,
}

/// `h`-step-ahead return aligned to the current row; rows without a future
/// price get zero.
pub fn forward_returns(closes: &[f64], horizon: usize, kind: ReturnKind) -> Vec<f64> {
    (0..closes.len())
        .map(|t| match closes.get(t + horizon) {
            Some(&future) if horizon > 0 => match kind {
                ReturnKind::Pct => future / closes[t] - 1.0,
                ReturnKind::Log => (future / closes[t]).ln(),
            },
            _ => 0.0,
        })
        .collect()
}

/// Ridge regression without intercept, one weight column per horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    pub feature_names: Vec<String>,
    pub horizons: Vec<usize>,
    pub lambda: f64,
    /// `weights[f][h]` for feature `f`, horizon index `h`.
    pub weights: Vec<Vec<f64>>,
    /// Standard deviation of the primary-horizon prediction on the fit data.
    pub alpha_sd: f64,
    pub primary_horizon: usize,
    pub target_kind: ReturnKind,
}

pub const DEFAULT_HORIZONS: [usize; 4] = [1, 10, 100, 1000];
pub const PRIMARY_HORIZON: usize = 10;
pub const DEFAULT_LAMBDA: f64 = 0.5;

impl RidgeModel {
    pub fn primary_index(&self) -> usize {
        self.horizons
            .iter()
            .position(|&h| h == self.primary_horizon)
            .expect("primary horizon validated at fit time")
    }

    /// Predictions for each horizon, `out[h][row]`.
    pub fn predict_matrix(&self, x: &FeatureMatrix) -> Result<Vec<Vec<f64>>, ForecastError> {
        if x.names != self.feature_names {
            return Err(ForecastError::ColumnMismatch(format!(
                "model expects {:?}, got {:?}",
                self.feature_names, x.names
            )));
        }
        let n = x.n_rows();
        let mut out = vec![vec![0.0; n]; self.horizons.len()];
        for (f, col) in x.columns.iter().enumerate() {
            for (h, pred) in out.iter_mut().enumerate() {
                let w = self.weights[f][h];
                for (p, v) in pred.iter_mut().zip(col) {
                    *p += w * v;
                }
            }
        }
        Ok(out)
    }
}

/// Solves `(X'X + lambda I) W = X'Y` by LDLᵀ factorisation.
///
/// `x` is column-major (`x[f][row]`), `y` is `y[h][row]`; the result is
/// `w[f][h]`.
pub fn ridge_solve(
    x: &[Vec<f64>],
    y: &[Vec<f64>],
    lambda: f64,
) -> Result<Vec<Vec<f64>>, ForecastError> {
    let p = x.len();
    let gram: Vec<Vec<f64>> = (0..p)
        .map(|i| {
            (0..p)
                .map(|j| {
                    let dot: f64 = x[i].iter().zip(&x[j]).map(|(a, b)| a * b).sum();
                    if i == j {
                        dot + lambda
                    } else {
                        dot
                    }
                })
                .collect()
        })
        .collect();
    let factors = ldl(&gram).ok_or(ForecastError::Singular)?;
    let mut w = vec![vec![0.0; y.len()]; p];
    for (h, target) in y.iter().enumerate() {
        let rhs: Vec<f64> = x
            .iter()
            .map(|col| col.iter().zip(target).map(|(a, b)| a * b).sum())
            .collect();
        let sol = ldl_solve(&factors, &rhs);
        for f in 0..p {
            w[f][h] = sol[f];
        }
    }
    Ok(w)
}

/// LDLᵀ factorisation (square-root free, so a 1×1 system is a single exact
/// division). Returns unit-lower `L` and the diagonal `D`.
fn ldl(a: &[Vec<f64>]) -> Option<(Vec<Vec<f64>>, Vec<f64>)> {
    let n = a.len();
    let scale = (0..n)
        .map(|i| a[i][i].abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut l = vec![vec![0.0; n]; n];
    let mut d = vec![0.0; n];
    for j in 0..n {
        let s: f64 = (0..j).map(|k| l[j][k] * l[j][k] * d[k]).sum();
        d[j] = a[j][j] - s;
        if !(d[j] > scale * 1e-14) {
            return None;
        }
        l[j][j] = 1.0;
        for i in j + 1..n {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k] * d[k]).sum();
            l[i][j] = (a[i][j] - s) / d[j];
        }
    }
    Some((l, d))
}

fn ldl_solve((l, d): &(Vec<Vec<f64>>, Vec<f64>), b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut z = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i][k] * z[k]).sum();
        z[i] = b[i] - s;
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k][i] * x[k]).sum();
        x[i] = z[i] / d[i] - s;
    }
    x
}

pub(crate) fn sample_std(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}

/// Fits the multi-horizon ridge model on features aligned with `series`.
pub fn fit_ridge(
    x: &FeatureMatrix,
    series: &BarSeries,
    lambda: f64,
    horizons: &[usize],
    kind: ReturnKind,
) -> Result<RidgeModel, ForecastError> {
    if x.n_rows() != series.len() {
        return Err(ForecastError::Shape(format!(
            "{} feature rows for {} bars",
            x.n_rows(),
            series.len()
        )));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(ForecastError::Config(format!(
            "ridge lambda must be >= 0, got {lambda}"
        )));
    }
    if horizons.is_empty() || horizons.contains(&0) {
        return Err(ForecastError::Config(
            "horizons must be non-empty and positive".into(),
        ));
    }
    let primary_horizon = if horizons.contains(&PRIMARY_HORIZON) {
        PRIMARY_HORIZON
    } else {
        horizons[0]
    };
    let closes = series.closes();
    let targets: Vec<Vec<f64>> = horizons
        .iter()
        .map(|&h| forward_returns(&closes, h, kind))
        .collect();
    let weights = ridge_solve(&x.columns, &targets, lambda)?;
    if weights.iter().flatten().any(|w| !w.is_finite()) {
        return Err(ForecastError::Singular);
    }
    let mut model = RidgeModel {
        feature_names: x.names.clone(),
        horizons: horizons.to_vec(),
        lambda,
        weights,
        alpha_sd: 0.0,
        primary_horizon,
        target_kind: kind,
    };
    let fitted = model.predict_matrix(x)?;
    model.alpha_sd = sample_std(&fitted[model.primary_index()]);
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scalar_normal_equation() {
        let w = ridge_solve(&[vec![1.0, 1.0]], &[vec![1.0, 1.0]], 0.5).unwrap();
        assert_eq!(w[0][0], 0.8);
    }

    #[test]
    fn unregularized_recovers_exact_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 50;
        let x: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let truth = [0.3, -1.2, 2.0];
        let y: Vec<f64> = (0..n)
            .map(|r| (0..3).map(|f| truth[f] * x[f][r]).sum())
            .collect();
        let w = ridge_solve(&x, &[y], 0.0).unwrap();
        for f in 0..3 {
            assert_relative_eq!(w[f][0], truth[f], max_relative = 1e-10);
        }
    }

    #[test]
    fn rank_deficient_without_regularization_is_singular() {
        let x = vec![vec![1.0, 2.0, 3.0], vec![2.0, 4.0, 6.0]];
        assert_eq!(
            ridge_solve(&x, &[vec![1.0, 1.0, 1.0]], 0.0),
            Err(ForecastError::Singular)
        );
        assert!(ridge_solve(&x, &[vec![1.0, 1.0, 1.0]], 0.5).is_ok());
    }

    #[test]
    fn forward_returns_align_and_pad() {
        let closes = [100.0, 110.0, 121.0];
        let y = forward_returns(&closes, 1, ReturnKind::Pct);
        assert_relative_eq!(y[0], 0.1, max_relative = 1e-12);
        assert_relative_eq!(y[1], 0.1, max_relative = 1e-12);
        assert_eq!(y[2], 0.0);
        let l = forward_returns(&closes, 2, ReturnKind::Log);
        assert_relative_eq!(l[0], 1.21f64.ln(), max_relative = 1e-12);
    }

    #[test]
    fn residual_optimality() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = 40;
            let p = 4;
            let x: Vec<Vec<f64>> = (0..p)
                .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let lambda = rng.random_range(0.01..2.0);
            let w: Vec<f64> = ridge_solve(&x, std::slice::from_ref(&y), lambda)
                .unwrap()
                .iter()
                .map(|r| r[0])
                .collect();
            let objective = |w: &[f64]| {
                let rss: f64 = (0..n)
                    .map(|r| {
                        let pred: f64 = (0..p).map(|f| w[f] * x[f][r]).sum();
                        (y[r] - pred).powi(2)
                    })
                    .sum();
                rss + lambda * w.iter().map(|v| v * v).sum::<f64>()
            };
            let base = objective(&w);
            for f in 0..p {
                for eps in [1e-4, -1e-4] {
                    let mut w2 = w.clone();
                    w2[f] += eps;
                    assert!(objective(&w2) > base);
                }
            }
        }
    }
}
