use rand::Rng;
use serde::{Deserialize, Serialize};

use super::CalibrationError;
use crate::genome::Genome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub scale: ParamScale,
}

impl ParamSpec {
    /// Maps a value onto the search axis (log10 for log-scaled parameters).
    pub fn to_internal(&self, x: f64) -> f64 {
        match self.scale {
            ParamScale::Linear => x,
            ParamScale::Log => x.log10(),
        }
    }

    pub fn from_internal(&self, z: f64) -> f64 {
        let x = match self.scale {
            ParamScale::Linear => z,
            ParamScale::Log => 10f64.powf(z),
        };
        self.clip(x)
    }

    pub fn internal_bounds(&self) -> (f64, f64) {
        (self.to_internal(self.lower), self.to_internal(self.upper))
    }

    /// Position in [0, 1] along the search axis.
    pub fn to_unit(&self, x: f64) -> f64 {
        let (lo, hi) = self.internal_bounds();
        ((self.to_internal(self.clip(x)) - lo) / (hi - lo)).clamp(0.0, 1.0)
    }

    pub fn from_unit(&self, u: f64) -> f64 {
        let (lo, hi) = self.internal_bounds();
        self.from_internal(lo + u.clamp(0.0, 1.0) * (hi - lo))
    }

    pub fn clip(&self, x: f64) -> f64 {
        if x.is_nan() {
            return self.lower;
        }
        x.clamp(self.lower, self.upper)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && x <= self.upper
    }

    fn validate(&self) -> Result<(), CalibrationError> {
        let bad = |why: &str| {
            Err(CalibrationError::InvalidSpace(format!(
                "{}: {why}",
                self.name
            )))
        };
        if !(self.lower.is_finite() && self.upper.is_finite()) {
            return bad("bounds must be finite");
        }
        if !(self.lower < self.upper) {
            return bad("lower must be < upper");
        }
        if self.scale == ParamScale::Log && !(self.lower > 0.0) {
            return bad("log scale requires lower > 0");
        }
        Ok(())
    }
}

/// Ordered set of named, bounded parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ParamSpec>", into = "Vec<ParamSpec>")]
pub struct ParamSpace {
    params: Vec<ParamSpec>,
}

impl TryFrom<Vec<ParamSpec>> for ParamSpace {
    type Error = CalibrationError;

    fn try_from(params: Vec<ParamSpec>) -> Result<Self, Self::Error> {
        ParamSpace::new(params)
    }
}

impl From<ParamSpace> for Vec<ParamSpec> {
    fn from(space: ParamSpace) -> Self {
        space.params
    }
}

impl ParamSpace {
    pub fn new(params: Vec<ParamSpec>) -> Result<Self, CalibrationError> {
        for (i, p) in params.iter().enumerate() {
            p.validate()?;
            if params[..i].iter().any(|q| q.name == p.name) {
                return Err(CalibrationError::InvalidSpace(format!(
                    "duplicate parameter {}",
                    p.name
                )));
            }
        }
        Ok(ParamSpace { params })
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    pub fn get(&self, name: &str) -> Option<&ParamSpec> {
        self.params.iter().find(|p| p.name == name)
    }

    /// True when every parameter of the space is present in `genome` and in bounds.
    pub fn contains(&self, genome: &Genome) -> bool {
        self.params
            .iter()
            .all(|p| genome.get(&p.name).is_some_and(|x| p.contains(x)))
    }

    /// Clips the space's parameters into bounds; other keys pass through.
    pub fn clip(&self, genome: &Genome) -> Genome {
        let mut out = genome.clone();
        for p in &self.params {
            if let Some(x) = genome.get(&p.name) {
                out.set(p.name.clone(), p.clip(x));
            }
        }
        out
    }

    /// Uniform on each parameter's axis (log10-uniform for log scales).
    pub fn sample_random<R: Rng + ?Sized>(&self, rng: &mut R) -> Genome {
        self.params
            .iter()
            .map(|p| {
                let (lo, hi) = p.internal_bounds();
                (p.name.clone(), p.from_internal(rng.random_range(lo..=hi)))
            })
            .collect()
    }

    /// Coordinates in the unit cube; missing keys map to 0.
    pub fn to_unit_vector(&self, genome: &Genome) -> Vec<f64> {
        self.params
            .iter()
            .map(|p| genome.get(&p.name).map_or(0.0, |x| p.to_unit(x)))
            .collect()
    }

    /// Euclidean distance in the unit cube divided by √dim, so it lies in [0, 1].
    pub fn normalized_distance(&self, a: &Genome, b: &Genome) -> f64 {
        if self.params.is_empty() {
            return 0.0;
        }
        let (ua, ub) = (self.to_unit_vector(a), self.to_unit_vector(b));
        let ss: f64 = ua.iter().zip(&ub).map(|(x, y)| (x - y).powi(2)).sum();
        (ss / self.params.len() as f64).sqrt()
    }
}
