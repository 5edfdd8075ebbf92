use serde::{Deserialize, Serialize};

use crate::genome::Genome;

/// Behavioral coordinates used to place a candidate in the grid.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Descriptor {
    /// Named-parameter count (or program length for text candidates).
    pub complexity: f64,
    /// Distance from the seed in [0, 1].
    pub diversity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: u64,
    pub genome: Genome,
    /// Program text for candidates produced by external mutators.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub program: Option<String>,
    pub parent_id: Option<u64>,
    pub generation: u32,
    pub island: usize,
    pub mutator_tag: String,
    /// Selection fitness after any budget penalty; `None` when evaluation failed.
    pub fitness: Option<f64>,
    pub descriptor: Descriptor,
}

impl Candidate {
    pub fn score(&self) -> f64 {
        self.fitness.unwrap_or(f64::NEG_INFINITY)
    }

    /// Higher fitness first, earlier id on ties.
    pub fn rank_cmp(a: &Candidate, b: &Candidate) -> std::cmp::Ordering {
        b.score().total_cmp(&a.score()).then(a.id.cmp(&b.id))
    }
}
