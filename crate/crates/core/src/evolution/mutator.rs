use std::io::Write;
use std::process::{Command, Stdio};

use rand::{Rng, RngCore};
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Candidate, Descriptor};
use crate::calibration::ParamSpace;
use crate::genome::Genome;

#[derive(Debug, Error, PartialEq)]
pub enum MutatorError {
    #[error("mutator process failed: {0}")]
    Process(String),
    #[error("mutator output is not valid JSON: {0}")]
    Output(String),
}

/// A child produced by a mutator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub genome: Genome,
    #[serde(default)]
    pub program: Option<String>,
    /// Which mutation operator produced the child; defaults to the mutator name.
    #[serde(default)]
    pub tag: Option<String>,
    /// Overrides the built-in descriptor (e.g. program length and embedding distance).
    #[serde(default)]
    pub descriptor: Option<Descriptor>,
}

pub trait Mutator: Sync {
    fn name(&self) -> &str;
    fn propose(
        &self,
        parent: &Candidate,
        inspirations: &[Candidate],
        rng: &mut dyn RngCore,
    ) -> Result<Proposal, MutatorError>;
}

/// Gaussian perturbation on each parameter's search axis, optionally preceded
/// by blending with an inspiration. Keys outside the space pass through.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbMutator {
    pub space: ParamSpace,
    pub p_cross: f64,
    pub p_mut: f64,
    /// Noise sd as a fraction of the parameter's (log-)range.
    pub sigma_rel: f64,
}

impl PerturbMutator {
    pub fn new(space: ParamSpace) -> Self {
        PerturbMutator {
            space,
            p_cross: 0.3,
            p_mut: 0.3,
            sigma_rel: 0.1,
        }
    }
}

impl Mutator for PerturbMutator {
    fn name(&self) -> &str {
        "perturb"
    }

    fn propose(
        &self,
        parent: &Candidate,
        inspirations: &[Candidate],
        rng: &mut dyn RngCore,
    ) -> Result<Proposal, MutatorError> {
        let params = self.space.params();
        let mut unit = self.space.to_unit_vector(&parent.genome);
        let mut tag = "perturb";
        let others: Vec<&Candidate> = inspirations.iter().filter(|c| c.id != parent.id).collect();
        if !others.is_empty() && rng.random::<f64>() < self.p_cross {
            let mate = others[rng.random_range(0..others.len())];
            for (u, m) in unit.iter_mut().zip(self.space.to_unit_vector(&mate.genome)) {
                *u = 0.5 * (*u + m);
            }
            tag = "crossover";
        }
        if !params.is_empty() {
            // Always move at least one coordinate.
            let forced = rng.random_range(0..params.len());
            for (i, u) in unit.iter_mut().enumerate() {
                if i == forced || rng.random::<f64>() < self.p_mut {
                    let z: f64 = rng.sample(StandardNormal);
                    *u = (*u + self.sigma_rel * z).clamp(0.0, 1.0);
                }
            }
        }
        let mut genome = parent.genome.clone();
        for (p, u) in params.iter().zip(unit) {
            genome.set(p.name.clone(), p.from_unit(u));
        }
        Ok(Proposal {
            genome,
            program: None,
            tag: Some(tag.to_string()),
            descriptor: None,
        })
    }
}

/// Runs an external command per proposal. The command receives
/// `{"parent": .., "inspirations": [..], "seed": n}` on stdin and must print
/// a [`Proposal`] as JSON on stdout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExternalMutator {
    pub name: String,
    pub command: Vec<String>,
}

#[derive(Serialize)]
struct ExternalRequest<'a> {
    parent: &'a Candidate,
    inspirations: &'a [Candidate],
    seed: u64,
}

impl Mutator for ExternalMutator {
    fn name(&self) -> &str {
        &self.name
    }

    fn propose(
        &self,
        parent: &Candidate,
        inspirations: &[Candidate],
        rng: &mut dyn RngCore,
    ) -> Result<Proposal, MutatorError> {
        let (prog, args) = self
            .command
            .split_first()
            .ok_or_else(|| MutatorError::Process("empty command".into()))?;
        let request = serde_json::to_vec(&ExternalRequest {
            parent,
            inspirations,
            seed: rng.next_u64(),
        })
        .map_err(|e| MutatorError::Output(e.to_string()))?;
        let mut child = Command::new(prog)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| MutatorError::Process(format!("{prog}: {e}")))?;
        // A mutator that ignores its input may exit before reading it all.
        let _ = child.stdin.take().expect("piped stdin").write_all(&request);
        let out = child
            .wait_with_output()
            .map_err(|e| MutatorError::Process(e.to_string()))?;
        if !out.status.success() {
            return Err(MutatorError::Process(format!(
                "{prog} exited with {}: {}",
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        serde_json::from_slice(&out.stdout).map_err(|e| MutatorError::Output(e.to_string()))
    }
}
