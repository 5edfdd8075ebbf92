use super::metrics::pearson;
use super::FeatureMatrix;

pub const DEFAULT_MAX_FEATURES: usize = 10;
pub const DEFAULT_CORR_CAP: f64 = 0.85;

/// Greedy correlation-filtered feature selection.
///
/// Candidates are ranked by |Pearson correlation| with `target` (ties keep
/// column order) and accepted in that order unless their |correlation| with
/// any already accepted column is at least `corr_cap`. Stops after `max_k`.
pub fn greedy_select(
    candidates: &FeatureMatrix,
    target: &[f64],
    max_k: usize,
    corr_cap: f64,
) -> Vec<String> {
    let scores: Vec<f64> = candidates
        .columns
        .iter()
        .map(|c| pearson(c, target).abs())
        .collect();
    let mut order: Vec<usize> = (0..candidates.n_cols()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));

    let mut accepted: Vec<usize> = Vec::new();
    for idx in order {
        if accepted.len() >= max_k {
            break;
        }
        let admissible = accepted
            .iter()
            .all(|&j| pearson(&candidates.columns[idx], &candidates.columns[j]).abs() < corr_cap);
        if admissible {
            accepted.push(idx);
        }
    }
    accepted
        .into_iter()
        .map(|i| candidates.names[i].clone())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(cols: Vec<(&str, Vec<f64>)>) -> FeatureMatrix {
        let n = cols[0].1.len();
        let mut fm = FeatureMatrix::new((0..n as i64).collect());
        for (name, c) in cols {
            fm.push_column(name, c).unwrap();
        }
        fm
    }

    #[test]
    fn duplicate_columns_keep_one() {
        let a = vec![1.0, 2.0, 3.0, 5.0, 4.0];
        let fm = matrix(vec![("a", a.clone()), ("a_copy", a.clone())]);
        assert_eq!(greedy_select(&fm, &a, 10, 0.85), vec!["a".to_string()]);
    }

    #[test]
    fn zero_cap_selects_at_most_one_correlated() {
        let fm = matrix(vec![("x", vec![1.0, 2.0, 3.0]), ("y", vec![3.0, 1.0, 2.0])]);
        let target = vec![1.0, 2.0, 3.0];
        assert_eq!(greedy_select(&fm, &target, 0, 0.85), Vec::<String>::new());
        assert_eq!(greedy_select(&fm, &target, 1, 0.85), vec!["x".to_string()]);
    }
}
