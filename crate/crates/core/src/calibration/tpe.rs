use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{CalibrationError, ParamSpace, ParamSpec};
use crate::genome::Genome;
use crate::par::{self, Jobs};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TpeConfig {
    pub n_random: usize,
    pub n_guided: usize,
    /// Fraction of the history treated as elite.
    pub gamma: f64,
    /// Candidates drawn from the elite density per guided step.
    pub n_candidates: usize,
    pub seed: u64,
}

impl Default for TpeConfig {
    fn default() -> Self {
        TpeConfig {
            n_random: 30,
            n_guided: 90,
            gamma: 0.25,
            n_candidates: 24,
            seed: 0,
        }
    }
}

impl TpeConfig {
    pub fn validate(&self) -> Result<(), CalibrationError> {
        if self.n_random < 2 {
            return Err(CalibrationError::InvalidConfig(
                "n_random must be >= 2".into(),
            ));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(CalibrationError::InvalidConfig(format!(
                "gamma {} outside (0, 1)",
                self.gamma
            )));
        }
        if self.n_candidates == 0 {
            return Err(CalibrationError::InvalidConfig(
                "n_candidates must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Random,
    Guided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub genome: Genome,
    /// `None` when the objective failed or returned a non-finite value.
    pub objective: Option<f64>,
    pub phase: Phase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TrialRecord {
    pub fn is_failed(&self) -> bool {
        self.objective.is_none()
    }

    /// Failed trials rank below everything.
    pub fn score(&self) -> f64 {
        self.objective.unwrap_or(f64::NEG_INFINITY)
    }
}

/// Gaussian Parzen density on one search axis, truncated to the bounds and
/// mixed with a uniform prior component of equal weight to one kernel.
struct Parzen {
    centres: Vec<f64>,
    bandwidth: f64,
    lo: f64,
    hi: f64,
    /// Truncation mass of each kernel.
    mass: Vec<f64>,
}

impl Parzen {
    fn fit(points: &[f64], lo: f64, hi: f64) -> Parzen {
        let range = hi - lo;
        let n = points.len() as f64;
        let sd = if points.len() > 1 {
            let mean = points.iter().sum::<f64>() / n;
            (points.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        // Rule-of-thumb width, floored so a tight cluster cannot collapse the
        // search onto a single point.
        let floor = range / (n + 1.0).min(100.0);
        let bandwidth = (1.06 * sd * n.powf(-0.2)).clamp(floor, range);
        let mass = points
            .iter()
            .map(|&c| (phi((hi - c) / bandwidth) - phi((lo - c) / bandwidth)).max(1e-300))
            .collect();
        Parzen {
            centres: points.to_vec(),
            bandwidth,
            lo,
            hi,
            mass,
        }
    }

    fn weight(&self) -> f64 {
        1.0 / (self.centres.len() as f64 + 1.0)
    }

    fn ln_pdf(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let kernels: f64 = self
            .centres
            .iter()
            .zip(&self.mass)
            .map(|(&c, &m)| {
                let z = (x - c) / h;
                (-0.5 * z * z).exp() / (h * (2.0 * std::f64::consts::PI).sqrt() * m)
            })
            .sum();
        (self.weight() * (kernels + 1.0 / (self.hi - self.lo))).ln()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let k = rng.random_range(0..=self.centres.len());
        if k == self.centres.len() {
            return rng.random_range(self.lo..=self.hi);
        }
        let c = self.centres[k];
        let h = self.bandwidth;
        let (a, b) = (phi((self.lo - c) / h), phi((self.hi - c) / h));
        let u = a + rng.random::<f64>() * (b - a);
        let x = if u > 0.0 && u < 1.0 {
            c + h * std_normal().inverse_cdf(u)
        } else {
            c
        };
        x.clamp(self.lo, self.hi)
    }
}

fn std_normal() -> Normal {
    Normal::standard()
}

fn phi(z: f64) -> f64 {
    std_normal().cdf(z)
}

fn internal(spec: &ParamSpec, genome: &Genome) -> f64 {
    let (lo, hi) = spec.internal_bounds();
    genome
        .get(&spec.name)
        .map_or((lo + hi) / 2.0, |x| spec.to_internal(spec.clip(x)))
}

/// Proposes the next genome: splits the successful history at the `gamma`
/// quantile, fits per-dimension densities to the elite (ℓ) and remaining (g)
/// trials, and returns the best of `n_candidates` draws from ℓ by ℓ/g.
/// Falls back to a uniform sample when fewer than two trials succeeded or all
/// objectives are identical.
pub fn tpe_propose<R: Rng + ?Sized>(
    history: &[TrialRecord],
    space: &ParamSpace,
    config: &TpeConfig,
    rng: &mut R,
) -> Genome {
    let mut ok: Vec<&TrialRecord> = history.iter().filter(|t| !t.is_failed()).collect();
    let degenerate = ok.len() < 2 || ok.iter().all(|t| t.objective == ok[0].objective);
    if degenerate || space.is_empty() {
        return space.sample_random(rng);
    }
    ok.sort_by(|a, b| {
        b.score()
            .total_cmp(&a.score())
            .then(a.trial_index.cmp(&b.trial_index))
    });
    let n_elite = ((config.gamma * ok.len() as f64).ceil() as usize).clamp(1, ok.len() - 1);
    let (elite, rest) = ok.split_at(n_elite);

    let dims: Vec<(Parzen, Parzen)> = space
        .params()
        .iter()
        .map(|p| {
            let (lo, hi) = p.internal_bounds();
            let e: Vec<f64> = elite.iter().map(|t| internal(p, &t.genome)).collect();
            let r: Vec<f64> = rest.iter().map(|t| internal(p, &t.genome)).collect();
            (Parzen::fit(&e, lo, hi), Parzen::fit(&r, lo, hi))
        })
        .collect();

    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..config.n_candidates {
        let z: Vec<f64> = dims.iter().map(|(l, _)| l.sample(rng)).collect();
        let score: f64 = dims
            .iter()
            .zip(&z)
            .map(|((l, g), &x)| l.ln_pdf(x) - g.ln_pdf(x))
            .sum();
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, z));
        }
    }
    let (_, z) = best.expect("n_candidates >= 1");
    space
        .params()
        .iter()
        .zip(z)
        .map(|(p, x)| (p.name.clone(), p.from_internal(x)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub trial_index: usize,
    pub objective: Option<f64>,
    pub running_best: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub trials: Vec<TrialRecord>,
}

impl Calibration {
    /// Highest objective; the earliest trial wins ties.
    pub fn best(&self) -> Option<&TrialRecord> {
        self.trials
            .iter()
            .filter(|t| !t.is_failed())
            .fold(None, |acc: Option<&TrialRecord>, t| match acc {
                Some(b) if b.score() >= t.score() => Some(b),
                _ => Some(t),
            })
    }

    pub fn convergence(&self) -> Vec<ConvergencePoint> {
        let mut best: Option<f64> = None;
        self.trials
            .iter()
            .map(|t| {
                if let Some(v) = t.objective {
                    best = Some(best.map_or(v, |b| b.max(v)));
                }
                ConvergencePoint {
                    trial_index: t.trial_index,
                    objective: t.objective,
                    running_best: best,
                }
            })
            .collect()
    }

    pub fn write_jsonl<W: Write>(&self, mut writer: W) -> std::io::Result<()> {
        for t in &self.trials {
            serde_json::to_writer(&mut writer, t)?;
            writer.write_all(b"\n")?;
        }
        Ok(())
    }
}

fn record(index: usize, genome: Genome, phase: Phase, result: Result<f64, String>) -> TrialRecord {
    let (objective, error) = match result {
        Ok(v) if v.is_finite() => (Some(v), None),
        Ok(v) => (None, Some(format!("non-finite objective {v}"))),
        Err(e) => (None, Some(e)),
    };
    TrialRecord {
        trial_index: index,
        genome,
        objective,
        phase,
        error,
    }
}

/// Runs `n_random` uniform trials (evaluated in parallel) followed by
/// `n_guided` sequential TPE proposals, maximizing `objective`.
pub fn calibrate<F>(
    space: &ParamSpace,
    objective: F,
    config: &TpeConfig,
    jobs: Jobs,
) -> Result<Calibration, CalibrationError>
where
    F: Fn(&Genome) -> Result<f64, String> + Sync,
{
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let initial: Vec<Genome> = (0..config.n_random)
        .map(|_| space.sample_random(&mut rng))
        .collect();
    let results = par::map(&initial, jobs, |g| objective(g));
    let mut trials: Vec<TrialRecord> = initial
        .into_iter()
        .zip(results)
        .enumerate()
        .map(|(i, (g, r))| record(i, g, Phase::Random, r))
        .collect();
    for _ in 0..config.n_guided {
        let g = tpe_propose(&trials, space, config, &mut rng);
        let r = objective(&g);
        trials.push(record(trials.len(), g, Phase::Guided, r));
    }
    for t in trials.iter().filter(|t| t.is_failed()) {
        log::warn!(
            "trial {} failed: {}",
            t.trial_index,
            t.error.as_deref().unwrap_or("unknown")
        );
    }
    Ok(Calibration { trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::ParamScale;
    use proptest::prelude::*;

    fn line() -> ParamSpace {
        ParamSpace::new(vec![ParamSpec {
            name: "X".into(),
            lower: 0.0,
            upper: 10.0,
            scale: ParamScale::Linear,
        }])
        .unwrap()
    }

    fn quad(g: &Genome) -> Result<f64, String> {
        let x = g.get("X").unwrap();
        Ok(-(x - 3.0).powi(2))
    }

    #[test]
    fn config_checks() {
        assert!(TpeConfig {
            n_random: 1,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(TpeConfig {
            gamma: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(TpeConfig::default().validate().is_ok());
    }

    #[test]
    fn quadratic_converges() {
        let cal = calibrate(
            &line(),
            quad,
            &TpeConfig {
                seed: 11,
                ..Default::default()
            },
            Jobs::SEQUENTIAL,
        )
        .unwrap();
        assert_eq!(cal.trials.len(), 120);
        assert_eq!(
            cal.trials
                .iter()
                .filter(|t| t.phase == Phase::Random)
                .count(),
            30
        );
        let best = cal.best().unwrap().genome.get("X").unwrap();
        assert!((best - 3.0).abs() < 0.1, "best {best}");
    }

    #[test]
    fn constant_objective_keeps_first() {
        let cal = calibrate(
            &line(),
            |_| Ok(1.0),
            &TpeConfig::default(),
            Jobs::SEQUENTIAL,
        )
        .unwrap();
        assert_eq!(cal.best().unwrap().trial_index, 0);
    }

    #[test]
    fn failures_recorded_and_skipped() {
        let flaky = |g: &Genome| {
            let x = g.get("X").unwrap();
            if x > 5.0 {
                Err("boom".to_string())
            } else if x < 0.5 {
                Ok(f64::NAN)
            } else {
                quad(g)
            }
        };
        let cal = calibrate(
            &line(),
            flaky,
            &TpeConfig {
                seed: 2,
                ..Default::default()
            },
            Jobs::SEQUENTIAL,
        )
        .unwrap();
        assert!(cal.trials.iter().any(|t| t.is_failed()));
        assert!(cal.best().unwrap().objective.is_some());
        let mut last = f64::NEG_INFINITY;
        for p in cal.convergence() {
            let b = p.running_best.unwrap_or(f64::NEG_INFINITY);
            assert!(b >= last);
            last = b;
        }
    }

    #[test]
    fn reproducible_and_parallel_invariant() {
        let cfg = TpeConfig {
            seed: 5,
            n_guided: 20,
            ..Default::default()
        };
        let a = calibrate(&line(), quad, &cfg, Jobs::SEQUENTIAL).unwrap();
        let b = calibrate(&line(), quad, &cfg, Jobs::ALL).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_elite_is_finite() {
        let space = line();
        let history: Vec<TrialRecord> = (0..4)
            .map(|i| {
                record(
                    i,
                    [("X", i as f64)].into_iter().collect(),
                    Phase::Random,
                    Ok(i as f64),
                )
            })
            .collect();
        let cfg = TpeConfig {
            gamma: 0.01,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            let g = tpe_propose(&history, &space, &cfg, &mut rng);
            assert!(space.contains(&g));
        }
    }

    #[test]
    fn jsonl_has_one_line_per_trial() {
        let cal = calibrate(
            &line(),
            quad,
            &TpeConfig {
                n_guided: 3,
                ..Default::default()
            },
            Jobs::SEQUENTIAL,
        )
        .unwrap();
        let mut buf = Vec::new();
        cal.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 33);
        let back: TrialRecord = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(back, cal.trials[0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn proposals_in_bounds(seed in any::<u64>(), n in 2usize..40) {
            let space = crate::strategy::default_param_space();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let history: Vec<TrialRecord> = (0..n)
                .map(|i| {
                    let g = space.sample_random(&mut rng);
                    let v = rng.random::<f64>();
                    record(i, g, Phase::Random, Ok(v))
                })
                .collect();
            let g = tpe_propose(&history, &space, &TpeConfig::default(), &mut rng);
            prop_assert!(space.contains(&g));
        }
    }
}
